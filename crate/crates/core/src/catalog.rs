//! Builtin model bundles and construction of [`ModelBundle`] values from
//! spec files.
//!
//! Every builtin is declared through the same DSL/JSON path as external
//! specs, so the catalog exercises the whole evaluator stack and an external
//! JSON encoding of a builtin produces bit-identical tensors.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::eval::{coordinate_env, eval_jet, EvalError};
use crate::dsl::spec::{domain_samples, DomainSpec, MetricSpec, ParsedSpec, SpecError};
use crate::dsl::Expr;
use crate::jet::{Jet, JetError};
use crate::linalg::{CMatrix, JetMatrix, LinalgError};

/// A-priori curvature-sign classification carried as catalog metadata. The
/// harness compares computed classifications against this; it is never
/// derived from the computation itself.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GriffithsClass {
    Negative,
    Positive,
    Indefinite,
    Flat,
}

impl std::fmt::Display for GriffithsClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            GriffithsClass::Negative => "negative",
            GriffithsClass::Positive => "positive",
            GriffithsClass::Indefinite => "indefinite",
            GriffithsClass::Flat => "flat",
        };
        write!(f, "{s}")
    }
}

/// A point (z, v) of the total space. The tautological vector at this point
/// is `v^i d/dv^i`, carried implicitly by the fiber coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct PointState {
    pub z: Vec<Complex64>,
    pub v: Vec<Complex64>,
}

impl PointState {
    pub fn new(z: Vec<Complex64>, v: Vec<Complex64>) -> Self {
        Self { z, v }
    }

    pub fn v_norm(&self) -> f64 {
        self.v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("unknown model `{0}`; builtins are {1:?}")]
    UnknownModel(String, &'static [&'static str]),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("{matrix} is not positive definite at z = {at:?}: min eigenvalue {min_eigenvalue:.3e}")]
    NotPositiveDefinite { matrix: &'static str, at: Vec<(f64, f64)>, min_eigenvalue: f64 },
    #[error("potential mismatch: k d dbar psi differs from g by {gap:.3e} at z = {at:?}")]
    PotentialMismatch { gap: f64, at: Vec<(f64, f64)> },
    #[error("beta mismatch: beta differs from i dbar psi by {gap:.3e} at z = {at:?}")]
    BetaMismatch { gap: f64, at: Vec<(f64, f64)> },
    #[error("evaluating {entry}: {source}")]
    Eval {
        entry: String,
        #[source]
        source: EvalError,
    },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Jet(#[from] JetError),
}

/// A model bundle: dimensions, expression-backed metric evaluators, optional
/// primitive and potential data, sampling domain, and catalog metadata.
pub struct ModelBundle {
    pub name: String,
    /// Base dimension.
    pub n: usize,
    /// Fiber rank.
    pub r: usize,
    g: Vec<Vec<Expr>>,
    big_g: Vec<Vec<Expr>>,
    beta: Option<Vec<Expr>>,
    psi: Option<Expr>,
    pub k: Option<f64>,
    pub domain: DomainSpec,
    pub expected_griffiths: GriffithsClass,
    /// True when the fiber metric equals the base metric entrywise (the
    /// tangent-bundle-style models the zero-section Ricci identity needs).
    pub tangent_like: bool,
}

pub const BUILTIN_NAMES: &[&str] = &[
    "disk_tangent",
    "halfplane_tangent",
    "taut_over_p1",
    "product_rank2",
    "o1_positive",
    "flat",
];

/// Tolerance for the construction-time semantic checks (positive
/// definiteness margin, potential and primitive consistency).
const VALIDATION_TOL: f64 = 1e-10;

impl ModelBundle {
    /// Look up a builtin model by name.
    pub fn builtin(name: &str) -> Result<ModelBundle, CatalogError> {
        let (spec, expected, tangent_like) = match name {
            // Poincare disk, hyperbolic normalization (1 - |z|^2)^-2 (Gauss
            // curvature -4 rather than the -1 of 4(1-|z|^2)^-2); this keeps
            // derived constants clean, e.g. d dbar G = 2 at the origin.
            "disk_tangent" => (
                MetricSpec {
                    n: 1,
                    r: 1,
                    g: vec![vec!["(1 - z1*conj(z1))^-2".into()]],
                    big_g: vec![vec!["(1 - z1*conj(z1))^-2".into()]],
                    beta: Some(vec!["i*z1/(1 - z1*conj(z1))".into()]),
                    psi: Some("-log(1 - z1*conj(z1))".into()),
                    k: Some(1.0),
                    domain: DomainSpec {
                        z_center: vec![[0.0, 0.0]],
                        z_radius: vec![0.8],
                        v_radius: 2.0,
                    },
                },
                GriffithsClass::Negative,
                true,
            ),
            // Upper half plane: -4/(z - conj z)^2 = 1/(Im z)^2, the same
            // hyperbolic metric in the half-plane chart.
            "halfplane_tangent" => (
                MetricSpec {
                    n: 1,
                    r: 1,
                    g: vec![vec!["-4/(z1 - conj(z1))^2".into()]],
                    big_g: vec![vec!["-4/(z1 - conj(z1))^2".into()]],
                    beta: None,
                    psi: None,
                    k: None,
                    domain: DomainSpec {
                        // Disc of radius 1.25 around 1.75i: Im z in [0.5, 3].
                        z_center: vec![[0.0, 1.75]],
                        z_radius: vec![1.25],
                        v_radius: 2.0,
                    },
                },
                GriffithsClass::Negative,
                true,
            ),
            // Tautological line bundle over P^1 restricted to a chart:
            // Fubini-Study base, fiber metric 1 + |z|^2.
            "taut_over_p1" => (
                MetricSpec {
                    n: 1,
                    r: 1,
                    g: vec![vec!["(1 + z1*conj(z1))^-2".into()]],
                    big_g: vec![vec!["1 + z1*conj(z1)".into()]],
                    beta: None,
                    psi: None,
                    k: None,
                    domain: DomainSpec {
                        z_center: vec![[0.0, 0.0]],
                        z_radius: vec![2.0],
                        v_radius: 2.0,
                    },
                },
                GriffithsClass::Negative,
                false,
            ),
            // Product of two disk factors; exercises every multi-index path.
            "product_rank2" => (
                MetricSpec {
                    n: 2,
                    r: 2,
                    g: vec![
                        vec!["(1 - z1*conj(z1))^-2".into(), "0".into()],
                        vec!["0".into(), "(1 - z2*conj(z2))^-2".into()],
                    ],
                    big_g: vec![
                        vec!["(1 - z1*conj(z1))^-2".into(), "0".into()],
                        vec!["0".into(), "(1 - z2*conj(z2))^-2".into()],
                    ],
                    beta: None,
                    psi: None,
                    k: None,
                    domain: DomainSpec {
                        z_center: vec![[0.0, 0.0], [0.0, 0.0]],
                        z_radius: vec![0.8, 0.8],
                        v_radius: 2.0,
                    },
                },
                GriffithsClass::Negative,
                true,
            ),
            // O(1)-style counterexample: curvature is positive, so the
            // harness must detect the failure of Griffiths negativity. The
            // fiber radius keeps the induced horizontal form positive
            // definite on the sampling domain (it degenerates at |v|^2 =
            // 1 + |z|^2).
            "o1_positive" => (
                MetricSpec {
                    n: 1,
                    r: 1,
                    g: vec![vec!["(1 + z1*conj(z1))^-2".into()]],
                    big_g: vec![vec!["(1 + z1*conj(z1))^-1".into()]],
                    beta: None,
                    psi: None,
                    k: None,
                    domain: DomainSpec {
                        z_center: vec![[0.0, 0.0]],
                        z_radius: vec![2.0],
                        v_radius: 0.75,
                    },
                },
                GriffithsClass::Positive,
                false,
            ),
            "flat" => (
                MetricSpec {
                    n: 1,
                    r: 1,
                    g: vec![vec!["1".into()]],
                    big_g: vec![vec!["1".into()]],
                    beta: None,
                    psi: None,
                    k: None,
                    domain: DomainSpec {
                        z_center: vec![[0.0, 0.0]],
                        z_radius: vec![1.0],
                        v_radius: 2.0,
                    },
                },
                GriffithsClass::Flat,
                true,
            ),
            other => return Err(CatalogError::UnknownModel(other.into(), BUILTIN_NAMES)),
        };
        let parsed = spec.validate()?;
        Self::from_parsed(name.to_string(), parsed, expected, tangent_like)
    }

    /// Build a model from an external spec. Classification metadata defaults
    /// to `indefinite` (unknown); tangent-likeness is probed numerically so
    /// that tangent-bundle-style specs get the zero-section identity checked.
    pub fn from_spec(name: String, spec: &MetricSpec) -> Result<ModelBundle, CatalogError> {
        let parsed = spec.validate()?;
        let tangent_like = probe_tangent_like(&parsed)?;
        Self::from_parsed(name, parsed, GriffithsClass::Indefinite, tangent_like)
    }

    pub fn from_json_file(path: &std::path::Path) -> Result<ModelBundle, CatalogError> {
        let spec = MetricSpec::from_file(path)?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "spec".into());
        Self::from_spec(name, &spec)
    }

    fn from_parsed(
        name: String,
        parsed: ParsedSpec,
        expected: GriffithsClass,
        tangent_like: bool,
    ) -> Result<ModelBundle, CatalogError> {
        let model = ModelBundle {
            name,
            n: parsed.n,
            r: parsed.r,
            g: parsed.g,
            big_g: parsed.big_g,
            beta: parsed.beta,
            psi: parsed.psi,
            k: parsed.k,
            domain: parsed.domain,
            expected_griffiths: expected,
            tangent_like,
        };
        model.validate_semantics()?;
        Ok(model)
    }

    /// Positive definiteness of both metrics across the domain, and
    /// consistency of the declared potential (k d dbar psi = g) and primitive
    /// (beta = i dbar psi) where present.
    fn validate_semantics(&self) -> Result<(), CatalogError> {
        let samples = domain_samples(&self.domain, 12, 0xbadd_cafe);
        for z in &samples {
            let at = || z.iter().map(|c| (c.re, c.im)).collect::<Vec<_>>();
            let g = self.base_metric_values(z)?;
            let min = g.min_eigenvalue()?;
            if min <= 1e-10 {
                return Err(CatalogError::NotPositiveDefinite {
                    matrix: "g",
                    at: at(),
                    min_eigenvalue: min,
                });
            }
            let gg = self.fiber_metric_values(z)?;
            let min = gg.min_eigenvalue()?;
            if min <= 1e-10 {
                return Err(CatalogError::NotPositiveDefinite {
                    matrix: "G",
                    at: at(),
                    min_eigenvalue: min,
                });
            }
            if let (Some(_), Some(k)) = (&self.psi, self.k) {
                let psi = self.psi_at(z, 2)?.expect("psi checked present");
                let mut gap = 0.0f64;
                for a in 0..self.n {
                    for b in 0..self.n {
                        let mut holo = vec![0u8; self.n + self.r];
                        let mut anti = vec![0u8; self.n + self.r];
                        holo[a] = 1;
                        anti[b] = 1;
                        let hess = psi.wirtinger(&holo, &anti)?;
                        gap = gap.max((hess * k - g[(a, b)]).norm());
                    }
                }
                if gap > VALIDATION_TOL {
                    return Err(CatalogError::PotentialMismatch { gap, at: at() });
                }
                if let Some(_beta) = &self.beta {
                    let beta_vals = self.beta_values(z)?.expect("beta checked present");
                    let mut gap = 0.0f64;
                    for (a, b_val) in beta_vals.iter().enumerate() {
                        let mut anti = vec![0u8; self.n + self.r];
                        anti[a] = 1;
                        let dbar_psi = psi.wirtinger(&vec![0u8; self.n + self.r], &anti)?;
                        gap = gap.max((Complex64::new(0.0, 1.0) * dbar_psi - b_val).norm());
                    }
                    if gap > VALIDATION_TOL {
                        return Err(CatalogError::BetaMismatch { gap, at: at() });
                    }
                }
            }
        }
        Ok(())
    }

    /// Coordinate jets for the base point, embedded in the full n + r
    /// complex-variable layout (base variables first, then fiber).
    pub fn base_env(&self, z: &[Complex64], degree: usize) -> Result<Vec<Jet>, JetError> {
        coordinate_env(z, self.n + self.r, degree)
    }

    /// Fiber coordinate jets for the point, variables n..n+r.
    pub fn fiber_env(&self, v: &[Complex64], degree: usize) -> Result<Vec<Jet>, JetError> {
        v.iter()
            .enumerate()
            .map(|(i, &vi)| Jet::complex_coordinate(self.n + i, vi, self.n + self.r, degree))
            .collect()
    }

    fn eval_matrix(
        &self,
        which: &'static str,
        exprs: &[Vec<Expr>],
        z: &[Complex64],
        degree: usize,
    ) -> Result<JetMatrix, CatalogError> {
        let env = self.base_env(z, degree)?;
        let dim = exprs.len();
        JetMatrix::try_from_fn(dim, dim, |i, j| {
            eval_jet(&exprs[i][j], &env).map_err(|source| CatalogError::Eval {
                entry: format!("{which}[{i}][{j}]"),
                source,
            })
        })
    }

    /// Base metric g as a jet-valued n x n matrix at z.
    pub fn base_metric_at(&self, z: &[Complex64], degree: usize) -> Result<JetMatrix, CatalogError> {
        self.eval_matrix("g", &self.g, z, degree)
    }

    /// Fiber metric G as a jet-valued r x r matrix at z.
    pub fn fiber_metric_at(&self, z: &[Complex64], degree: usize) -> Result<JetMatrix, CatalogError> {
        self.eval_matrix("G", &self.big_g, z, degree)
    }

    pub fn base_metric_values(&self, z: &[Complex64]) -> Result<CMatrix, CatalogError> {
        Ok(self.base_metric_at(z, 0)?.constant_matrix())
    }

    pub fn fiber_metric_values(&self, z: &[Complex64]) -> Result<CMatrix, CatalogError> {
        Ok(self.fiber_metric_at(z, 0)?.constant_matrix())
    }

    pub fn has_beta(&self) -> bool {
        self.beta.is_some()
    }

    pub fn has_potential(&self) -> bool {
        self.psi.is_some() && self.k.is_some()
    }

    /// Jet of the potential psi at z, if declared.
    pub fn psi_at(&self, z: &[Complex64], degree: usize) -> Result<Option<Jet>, CatalogError> {
        match &self.psi {
            None => Ok(None),
            Some(expr) => {
                let env = self.base_env(z, degree)?;
                let jet = eval_jet(expr, &env).map_err(|source| CatalogError::Eval {
                    entry: "psi".into(),
                    source,
                })?;
                Ok(Some(jet))
            }
        }
    }

    /// Jets of the dz^bar coefficients of beta at z, if declared.
    pub fn beta_at(&self, z: &[Complex64], degree: usize) -> Result<Option<Vec<Jet>>, CatalogError> {
        match &self.beta {
            None => Ok(None),
            Some(exprs) => {
                let env = self.base_env(z, degree)?;
                let mut out = Vec::with_capacity(exprs.len());
                for (a, expr) in exprs.iter().enumerate() {
                    out.push(eval_jet(expr, &env).map_err(|source| CatalogError::Eval {
                        entry: format!("beta[{a}]"),
                        source,
                    })?);
                }
                Ok(Some(out))
            }
        }
    }

    pub fn beta_values(&self, z: &[Complex64]) -> Result<Option<Vec<Complex64>>, CatalogError> {
        Ok(self
            .beta_at(z, 0)?
            .map(|jets| jets.iter().map(|j| j.constant_term()).collect()))
    }

    /// True when every coordinate of z lies inside its sampling disc.
    pub fn in_domain(&self, z: &[Complex64]) -> bool {
        z.len() == self.n
            && z.iter().enumerate().all(|(a, &za)| {
                let center = Complex64::new(self.domain.z_center[a][0], self.domain.z_center[a][1]);
                (za - center).norm() <= self.domain.z_radius[a] + 1e-12
            })
    }
}

/// Numerically probe G == g (requires n == r): compare entries at the
/// validation sample points.
fn probe_tangent_like(parsed: &ParsedSpec) -> Result<bool, CatalogError> {
    if parsed.n != parsed.r {
        return Ok(false);
    }
    let samples = domain_samples(&parsed.domain, 6, 0x7a9);
    for z in &samples {
        for i in 0..parsed.n {
            for j in 0..parsed.n {
                let a = crate::dsl::eval::eval_complex(&parsed.g[i][j], z).map_err(|source| {
                    CatalogError::Eval { entry: format!("g[{i}][{j}]"), source }
                })?;
                let b = crate::dsl::eval::eval_complex(&parsed.big_g[i][j], z).map_err(|source| {
                    CatalogError::Eval { entry: format!("G[{i}][{j}]"), source }
                })?;
                if (a - b).norm() > 1e-12 {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn every_builtin_constructs_and_validates() {
        for name in BUILTIN_NAMES {
            let m = ModelBundle::builtin(name).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(&m.name, name);
        }
    }

    #[test]
    fn unknown_name_is_an_error() {
        assert!(matches!(
            ModelBundle::builtin("nope"),
            Err(CatalogError::UnknownModel(..))
        ));
    }

    #[test]
    fn disk_fiber_metric_is_one_at_origin() {
        let m = ModelBundle::builtin("disk_tangent").unwrap();
        let g = m.fiber_metric_values(&[Complex64::new(0.0, 0.0)]).unwrap();
        assert_relative_eq!(g[(0, 0)].re, 1.0, epsilon = 1e-14);
        assert_relative_eq!(g[(0, 0)].im, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn halfplane_matches_im_normalization() {
        // -4/(z - conj z)^2 = 1/(Im z)^2
        let m = ModelBundle::builtin("halfplane_tangent").unwrap();
        let z = Complex64::new(0.3, 2.0);
        let g = m.base_metric_values(&[z]).unwrap();
        assert_relative_eq!(g[(0, 0)].re, 1.0 / (2.0 * 2.0), epsilon = 1e-13);
    }

    #[test]
    fn tangent_like_flags() {
        for (name, want) in [
            ("disk_tangent", true),
            ("halfplane_tangent", true),
            ("product_rank2", true),
            ("flat", true),
            ("taut_over_p1", false),
            ("o1_positive", false),
        ] {
            let m = ModelBundle::builtin(name).unwrap();
            assert_eq!(m.tangent_like, want, "{name}");
        }
    }

    #[test]
    fn from_spec_rejects_negative_fiber_metric() {
        let json = serde_json::json!({
            "n": 1, "r": 1,
            "g": [["1"]],
            "G": [["-1"]],
            "beta": null, "psi": null, "k": null,
            "domain": {"z_center": [[0.0, 0.0]], "z_radius": [0.5], "v_radius": 1.0}
        })
        .to_string();
        let spec = MetricSpec::from_json(&json).unwrap();
        assert!(matches!(
            ModelBundle::from_spec("bad".into(), &spec),
            Err(CatalogError::NotPositiveDefinite { matrix: "G", .. })
        ));
    }

    #[test]
    fn domain_membership() {
        let m = ModelBundle::builtin("disk_tangent").unwrap();
        assert!(m.in_domain(&[Complex64::new(0.5, 0.5)]));
        assert!(!m.in_domain(&[Complex64::new(0.95, 0.0)]));
    }

    #[test]
    fn disk_beta_norm_squared_is_norm_squared_of_z() {
        // |beta|_g^2 = |z|^2 for the disk model, hence bounded by 0.64 on the
        // sampling domain.
        let m = ModelBundle::builtin("disk_tangent").unwrap();
        for z in domain_samples(&m.domain, 25, 99) {
            let b = m.beta_values(&z).unwrap().unwrap()[0];
            let g = m.base_metric_values(&z).unwrap()[(0, 0)].re;
            let norm_sq = b.norm_sqr() / g;
            assert_relative_eq!(norm_sq, z[0].norm_sqr(), epsilon = 1e-10);
            assert!(norm_sq <= 0.64 + 1e-12);
        }
    }
}
