//! The verification checks, each behind a common trait and registered by
//! name so the CLI can select subsets at runtime.

mod identity;
mod sign;
mod scalar;

use kahler_core::catalog::{ModelBundle, PointState};

use crate::report::{CheckReport, SuiteConfig};
use crate::HarnessError;

/// A named verification strategy. `run` sees the shared deterministic point
/// sample and may emit several reports (sub-assertions); checks that do not
/// apply to a model emit a single skipped report instead of failing.
pub trait Check {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn run(&self, model: &ModelBundle, points: &[PointState], cfg: &SuiteConfig)
        -> Vec<CheckReport>;
}

/// All checks, in execution/report order.
pub fn registry() -> Vec<Box<dyn Check>> {
    vec![
        Box::new(identity::HessianDecomposition),
        Box::new(identity::NormIdentity),
        Box::new(identity::CurvatureBlocks),
        Box::new(sign::TautologicalSign),
        Box::new(sign::VerticalFlatness),
        Box::new(identity::RicciTrace),
        Box::new(identity::RicciZeroSection),
        Box::new(sign::GriffithsExpectation),
        Box::new(identity::PrimitiveExactness),
        Box::new(identity::TangentNorm),
        Box::new(scalar::SchwarzianMobius),
    ]
}

pub fn check_names() -> Vec<&'static str> {
    registry().iter().map(|c| c.name()).collect()
}

/// Select a subset by name, preserving registry order.
pub fn select(names: Option<&[String]>) -> Result<Vec<Box<dyn Check>>, HarnessError> {
    let all = registry();
    let Some(wanted) = names else {
        return Ok(all);
    };
    let available: Vec<&str> = all.iter().map(|c| c.name()).collect();
    for name in wanted {
        if !available.contains(&name.as_str()) {
            return Err(HarnessError::UnknownCheck(name.clone(), available.join(", ")));
        }
    }
    Ok(all
        .into_iter()
        .filter(|c| wanted.iter().any(|w| w == c.name()))
        .collect())
}

/// Cap for the checks built on degree-4 brute-force curvature.
pub(crate) const HEAVY_POINT_CAP: usize = 50;

/// Fixed relative tolerance of the norm identity (a single contraction, one
/// decade tighter than the linear class).
pub(crate) const NORM_IDENTITY_TOL: f64 = 1e-10;

/// Non-positivity threshold for the tautological curvature.
pub(crate) const TAUT_NONPOSITIVE_TOL: f64 = 1e-10;

/// Strict-negativity threshold off the zero section.
pub(crate) const TAUT_STRICT_TOL: f64 = -1e-12;

/// Absolute bound on the purely vertical curvature components.
pub(crate) const VERTICAL_FLATNESS_TOL: f64 = 1e-10;

/// Bound on the Schwarzian of a Mobius transformation.
pub(crate) const SCHWARZIAN_TOL: f64 = 1e-12;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_names_are_unique() {
        let names = check_names();
        let mut dedup = names.clone();
        dedup.sort_unstable();
        dedup.dedup();
        assert_eq!(names.len(), dedup.len());
        assert_eq!(names.len(), 11);
    }

    #[test]
    fn select_unknown_name_errors() {
        assert!(matches!(
            select(Some(&["nope".to_string()])),
            Err(HarnessError::UnknownCheck(..))
        ));
    }

    #[test]
    fn select_subset_preserves_registry_order() {
        let picked = select(Some(&["ricci".to_string(), "lemma1".to_string()])).unwrap();
        let names: Vec<_> = picked.iter().map(|c| c.name()).collect();
        assert_eq!(names, vec!["lemma1", "ricci"]);
    }
}
