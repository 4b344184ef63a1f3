//! Suite configuration and the self-describing report format.

use serde::{Deserialize, Serialize};

use kahler_core::catalog::PointState;

/// Configuration of one verification run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteConfig {
    /// Builtin name or path to a model-spec JSON file.
    pub model: String,
    /// Number of sampled points (every tenth lies on the zero section).
    pub samples: usize,
    pub seed: u64,
    /// Tolerance for identities linear in jets (single contraction chain).
    pub tol_linear: f64,
    /// Tolerance for identities passing through matrix inversion twice.
    pub tol_inverted: f64,
    /// Subset of check names to run; `None` means all.
    pub checks: Option<Vec<String>>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            model: "disk_tangent".into(),
            samples: 200,
            seed: 42,
            tol_linear: 1e-9,
            tol_inverted: 1e-8,
            checks: None,
        }
    }
}

impl SuiteConfig {
    pub fn for_model(model: &str) -> Self {
        Self { model: model.into(), ..Self::default() }
    }
}

/// Conventions block embedded in every report, since sign and index
/// conventions differ across the literature.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Conventions {
    pub curvature_sign: String,
    pub inverse_convention: String,
    pub frame_order: String,
    pub form_basis: String,
    pub ricci_orientation: String,
}

impl Default for Conventions {
    fn default() -> Self {
        Self {
            curvature_sign:
                "R_{i j~ a b~} = -d_a d_b~ G_{i j~} + G^{k l~} d_a G_{i l~} d_b~ G_{k j~}".into(),
            inverse_convention: "G_{i l~} G^{l~ k} = delta_i^k".into(),
            frame_order: "horizontal (base) first, vertical (fiber) second".into(),
            form_basis: "coefficients over dz^a ^ dz~^s with sqrt(-1) carried separately".into(),
            ricci_orientation:
                "both Ricci routes report d d~ Hessian coefficients of log det; the trace route is negated into that orientation".into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Passed,
    Failed,
    /// Check does not apply to this model (missing primitive/potential,
    /// wrong expected sign class); counts as passed for the exit status.
    Skipped,
}

/// Worst-case point coordinates for a failed or near-threshold check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WitnessPoint {
    pub z: Vec<[f64; 2]>,
    pub v: Vec<[f64; 2]>,
}

impl From<&PointState> for WitnessPoint {
    fn from(p: &PointState) -> Self {
        Self {
            z: p.z.iter().map(|c| [c.re, c.im]).collect(),
            v: p.v.iter().map(|c| [c.re, c.im]).collect(),
        }
    }
}

/// Outcome of one named verification.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_name: String,
    pub model: String,
    pub points_evaluated: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub status: CheckStatus,
    pub witness: Option<WitnessPoint>,
    pub note: Option<String>,
    /// Wall time of the owning check invocation. The only field that varies
    /// between identically-configured runs.
    pub wall_time_ms: u64,
}

impl CheckReport {
    pub fn skipped(check_name: &str, model: &str, note: String) -> Self {
        Self {
            check_name: check_name.into(),
            model: model.into(),
            points_evaluated: 0,
            max_error: 0.0,
            tolerance: 0.0,
            passed: true,
            status: CheckStatus::Skipped,
            witness: None,
            note: Some(note),
            wall_time_ms: 0,
        }
    }

    /// One deterministic summary line (no timing).
    pub fn summary_line(&self) -> String {
        let tag = match self.status {
            CheckStatus::Passed => "PASS",
            CheckStatus::Failed => "FAIL",
            CheckStatus::Skipped => "SKIP",
        };
        match self.status {
            CheckStatus::Skipped => format!(
                "[{tag}] {model} :: {name} ({note})",
                model = self.model,
                name = self.check_name,
                note = self.note.as_deref().unwrap_or("not applicable"),
            ),
            _ => format!(
                "[{tag}] {model} :: {name} points={pts} max_error={err:.3e} tol={tol:.1e}",
                model = self.model,
                name = self.check_name,
                pts = self.points_evaluated,
                err = self.max_error,
                tol = self.tolerance,
            ),
        }
    }
}

/// Full report of one model run: conventions block plus the check array.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteReport {
    pub conventions: Conventions,
    pub model: String,
    pub seed: u64,
    pub samples: usize,
    pub reports: Vec<CheckReport>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.reports.iter().all(|r| r.passed)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serialization cannot fail")
    }
}

/// Tracks the worst error and its witness across sampled points.
pub(crate) struct ErrorTracker {
    max_error: f64,
    witness: Option<WitnessPoint>,
    evaluated: usize,
}

impl ErrorTracker {
    pub fn new() -> Self {
        Self { max_error: 0.0, witness: None, evaluated: 0 }
    }

    pub fn observe(&mut self, error: f64, point: &PointState) {
        self.evaluated += 1;
        if error > self.max_error || self.witness.is_none() {
            self.max_error = self.max_error.max(error);
            self.witness = Some(WitnessPoint::from(point));
        }
    }

    pub fn evaluated(&self) -> usize {
        self.evaluated
    }

    pub fn into_report(
        self,
        check_name: &str,
        model: &str,
        tolerance: f64,
        note: Option<String>,
    ) -> CheckReport {
        let passed = self.max_error <= tolerance;
        CheckReport {
            check_name: check_name.into(),
            model: model.into(),
            points_evaluated: self.evaluated,
            max_error: self.max_error,
            tolerance,
            passed,
            status: if passed { CheckStatus::Passed } else { CheckStatus::Failed },
            witness: self.witness,
            note,
            wall_time_ms: 0,
        }
    }
}
