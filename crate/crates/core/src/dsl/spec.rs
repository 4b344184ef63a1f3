//! JSON model-spec format.
//!
//! A model bundle is declared in one UTF-8 JSON document:
//!
//! ```json
//! {
//!   "n": 1, "r": 1,
//!   "g": [["(1 - z1*conj(z1))^-2"]],
//!   "G": [["(1 - z1*conj(z1))^-2"]],
//!   "beta": ["i*z1/(1 - z1*conj(z1))"],
//!   "psi": "-log(1 - z1*conj(z1))",
//!   "k": 1.0,
//!   "domain": { "z_center": [[0.0, 0.0]], "z_radius": [0.8], "v_radius": 2.0 }
//! }
//! ```
//!
//! Matrix entries are DSL strings in the base variables `z1..zn` only; fiber
//! dependence is always the exact quadratic `G_{ij}(z) v^i conj(v^j)` built by
//! the engine. `beta` lists the coefficients of the `dz^bar` components of the
//! base primitive; `psi`/`k` declare a Kahler potential with
//! `sqrt(-1) k d dbar psi` equal to the base form.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::eval::{eval_complex, EvalError};
use super::parse::{parse, Expr, ParseError};
use crate::rng::SplitMix64;

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("failed to read model spec: {0}")]
    Io(#[from] std::io::Error),
    #[error("model spec is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("entry {entry}: {source}")]
    Parse {
        entry: String,
        #[source]
        source: ParseError,
    },
    #[error("{matrix} must be {n} x {n}, got {rows} rows and {cols} columns in row {row}")]
    BadShape { matrix: &'static str, n: usize, rows: usize, cols: usize, row: usize },
    #[error("domain must declare {n} centers and radii, got {got}")]
    BadDomain { n: usize, got: usize },
    #[error("domain radii and v_radius must be positive")]
    NonPositiveRadius,
    #[error("{matrix}[{i}][{j}] violates Hermitian symmetry by {gap:.3e} at z = {at:?}")]
    NotHermitian { matrix: &'static str, i: usize, j: usize, gap: f64, at: Vec<(f64, f64)> },
    #[error("entry {entry} failed to evaluate on the sampling domain: {source}")]
    Eval {
        entry: String,
        #[source]
        source: EvalError,
    },
    #[error("beta must list {n} components, got {got}")]
    BadBetaLength { n: usize, got: usize },
    #[error("psi and k must be declared together")]
    IncompletePotential,
}

/// Sampling region: one disc per base coordinate plus a fiber radius.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DomainSpec {
    /// Center of each coordinate disc as [re, im].
    pub z_center: Vec<[f64; 2]>,
    /// Radius of each coordinate disc.
    pub z_radius: Vec<f64>,
    /// Fiber vectors are sampled with norm up to this radius.
    pub v_radius: f64,
}

/// Declarative form of a model bundle, as read from JSON.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MetricSpec {
    pub n: usize,
    pub r: usize,
    /// Base metric entries, n x n DSL strings.
    pub g: Vec<Vec<String>>,
    /// Fiber metric entries, r x r DSL strings.
    #[serde(rename = "G")]
    pub big_g: Vec<Vec<String>>,
    /// Optional base primitive: coefficients of the dz^bar components.
    pub beta: Option<Vec<String>>,
    /// Optional Kahler potential for the base form.
    pub psi: Option<String>,
    /// Scale of the potential; sqrt(-1) k d dbar psi must equal the base form.
    pub k: Option<f64>,
    pub domain: DomainSpec,
}

/// Parsed expression matrices plus the validated structural data. Semantic
/// validation that needs the full evaluator stack (positive definiteness,
/// potential consistency) lives in the catalog.
pub struct ParsedSpec {
    pub n: usize,
    pub r: usize,
    pub g: Vec<Vec<Expr>>,
    pub big_g: Vec<Vec<Expr>>,
    pub beta: Option<Vec<Expr>>,
    pub psi: Option<Expr>,
    pub k: Option<f64>,
    pub domain: DomainSpec,
}

pub const HERMITIAN_SYMMETRY_TOL: f64 = 1e-10;

fn parse_matrix(
    name: &'static str,
    n: usize,
    entries: &[Vec<String>],
) -> Result<Vec<Vec<Expr>>, SpecError> {
    if entries.len() != n {
        return Err(SpecError::BadShape { matrix: name, n, rows: entries.len(), cols: 0, row: 0 });
    }
    let mut out = Vec::with_capacity(n);
    for (i, row) in entries.iter().enumerate() {
        if row.len() != n {
            return Err(SpecError::BadShape { matrix: name, n, rows: entries.len(), cols: row.len(), row: i });
        }
        let mut parsed = Vec::with_capacity(n);
        for (j, text) in row.iter().enumerate() {
            let expr = parse(text).map_err(|source| SpecError::Parse {
                entry: format!("{name}[{i}][{j}]"),
                source,
            })?;
            parsed.push(expr);
        }
        out.push(parsed);
    }
    Ok(out)
}

/// Deterministic sample points inside the declared domain, used for the
/// symmetry checks. Seed is fixed: validation must not depend on run
/// configuration.
pub fn domain_samples(domain: &DomainSpec, count: usize, seed: u64) -> Vec<Vec<Complex64>> {
    let mut rng = SplitMix64::new(seed);
    let n = domain.z_center.len();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut z = Vec::with_capacity(n);
        for a in 0..n {
            let radius = domain.z_radius[a] * rng.next_f64().sqrt();
            let angle = 2.0 * std::f64::consts::PI * rng.next_f64();
            let center = Complex64::new(domain.z_center[a][0], domain.z_center[a][1]);
            z.push(center + Complex64::from_polar(radius, angle));
        }
        out.push(z);
    }
    out
}

fn check_hermitian_matrix(
    name: &'static str,
    exprs: &[Vec<Expr>],
    samples: &[Vec<Complex64>],
) -> Result<(), SpecError> {
    let n = exprs.len();
    for z in samples {
        for i in 0..n {
            for j in 0..n {
                let entry = format!("{name}[{i}][{j}]");
                let a = eval_complex(&exprs[i][j], z)
                    .map_err(|source| SpecError::Eval { entry: entry.clone(), source })?;
                let b = eval_complex(&exprs[j][i], z)
                    .map_err(|source| SpecError::Eval { entry, source })?;
                let gap = (a - b.conj()).norm();
                if gap > HERMITIAN_SYMMETRY_TOL {
                    return Err(SpecError::NotHermitian {
                        matrix: name,
                        i,
                        j,
                        gap,
                        at: z.iter().map(|c| (c.re, c.im)).collect(),
                    });
                }
            }
        }
    }
    Ok(())
}

impl MetricSpec {
    pub fn from_json(text: &str) -> Result<Self, SpecError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self, SpecError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    /// Parse every entry and run the structural invariants: shapes, positive
    /// radii, and Hermitian symmetry of both expression matrices at 10
    /// deterministic sample points.
    pub fn validate(&self) -> Result<ParsedSpec, SpecError> {
        if self.domain.z_center.len() != self.n || self.domain.z_radius.len() != self.n {
            return Err(SpecError::BadDomain {
                n: self.n,
                got: self.domain.z_center.len().min(self.domain.z_radius.len()),
            });
        }
        if self.domain.v_radius <= 0.0 || self.domain.z_radius.iter().any(|&r| r <= 0.0) {
            return Err(SpecError::NonPositiveRadius);
        }
        let g = parse_matrix("g", self.n, &self.g)?;
        let big_g = parse_matrix("G", self.r, &self.big_g)?;

        let beta = match &self.beta {
            None => None,
            Some(entries) => {
                if entries.len() != self.n {
                    return Err(SpecError::BadBetaLength { n: self.n, got: entries.len() });
                }
                let mut parsed = Vec::with_capacity(self.n);
                for (a, text) in entries.iter().enumerate() {
                    parsed.push(parse(text).map_err(|source| SpecError::Parse {
                        entry: format!("beta[{a}]"),
                        source,
                    })?);
                }
                Some(parsed)
            }
        };
        if self.psi.is_some() != self.k.is_some() {
            return Err(SpecError::IncompletePotential);
        }
        let psi = match &self.psi {
            None => None,
            Some(text) => Some(parse(text).map_err(|source| SpecError::Parse {
                entry: "psi".into(),
                source,
            })?),
        };

        let samples = domain_samples(&self.domain, 10, 0x5eed);
        check_hermitian_matrix("g", &g, &samples)?;
        check_hermitian_matrix("G", &big_g, &samples)?;

        Ok(ParsedSpec {
            n: self.n,
            r: self.r,
            g,
            big_g,
            beta,
            psi,
            k: self.k,
            domain: self.domain.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk_json() -> String {
        serde_json::json!({
            "n": 1, "r": 1,
            "g": [["(1 - z1*conj(z1))^-2"]],
            "G": [["(1 - z1*conj(z1))^-2"]],
            "beta": ["i*z1/(1 - z1*conj(z1))"],
            "psi": "-log(1 - z1*conj(z1))",
            "k": 1.0,
            "domain": {"z_center": [[0.0, 0.0]], "z_radius": [0.8], "v_radius": 2.0}
        })
        .to_string()
    }

    #[test]
    fn disk_spec_round_trips() {
        let spec = MetricSpec::from_json(&disk_json()).unwrap();
        let parsed = spec.validate().unwrap();
        assert_eq!(parsed.n, 1);
        assert!(parsed.beta.is_some());
        assert!(parsed.psi.is_some());
    }

    #[test]
    fn non_hermitian_entry_is_rejected() {
        let json = serde_json::json!({
            "n": 1, "r": 1,
            "g": [["1"]],
            "G": [["z1"]],
            "beta": null, "psi": null, "k": null,
            "domain": {"z_center": [[0.0, 0.0]], "z_radius": [0.5], "v_radius": 1.0}
        })
        .to_string();
        let spec = MetricSpec::from_json(&json).unwrap();
        assert!(matches!(spec.validate(), Err(SpecError::NotHermitian { .. })));
    }

    #[test]
    fn parse_error_names_the_entry() {
        let json = serde_json::json!({
            "n": 1, "r": 1,
            "g": [["1"]],
            "G": [["1 +* z1"]],
            "beta": null, "psi": null, "k": null,
            "domain": {"z_center": [[0.0, 0.0]], "z_radius": [0.5], "v_radius": 1.0}
        })
        .to_string();
        let spec = MetricSpec::from_json(&json).unwrap();
        match spec.validate() {
            Err(SpecError::Parse { entry, .. }) => assert_eq!(entry, "G[0][0]"),
            other => panic!("expected parse error, got {:?}", other.is_ok()),
        }
    }
}
