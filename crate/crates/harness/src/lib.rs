//! Verification harness: deterministic point sampling, the named check
//! registry, suite configuration and reports, grid scans, and pointwise
//! tensor dumps. The `kahler` binary is a thin CLI over this library.

pub mod checks;
pub mod report;
pub mod sample;
pub mod scan;
pub mod tensor;

use std::path::Path;

use thiserror::Error;

use kahler_core::catalog::{CatalogError, ModelBundle, BUILTIN_NAMES};
use kahler_core::geometry::GeometryError;

pub use report::{CheckReport, CheckStatus, Conventions, SuiteConfig, SuiteReport};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("unknown check `{0}`; available checks: {1}")]
    UnknownCheck(String, String),
    #[error("bad argument: {0}")]
    BadArgument(String),
    #[error("point lies outside the model's sampling domain: {0}")]
    OutOfDomain(String),
    #[error("grid would produce {0} points, above the 1e6 limit")]
    GridTooLarge(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Resolve `--model`: a builtin name, or a path to a model-spec JSON file.
pub fn resolve_model(name_or_path: &str) -> Result<ModelBundle, HarnessError> {
    if BUILTIN_NAMES.contains(&name_or_path) {
        return Ok(ModelBundle::builtin(name_or_path)?);
    }
    let path = Path::new(name_or_path);
    if path.exists() {
        return Ok(ModelBundle::from_json_file(path)?);
    }
    Err(HarnessError::BadArgument(format!(
        "`{name_or_path}` is neither a builtin model ({BUILTIN_NAMES:?}) nor an existing spec file"
    )))
}

/// Run the configured checks against one model. Deterministic given
/// (model, seed, samples): the sampled points and every reported number are
/// reproduced bit for bit; only the wall-time fields vary between runs.
pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteReport, HarnessError> {
    let model = resolve_model(&cfg.model)?;
    let points = sample::sample_points(&model, cfg.samples, cfg.seed);
    let selected = checks::select(cfg.checks.as_deref())?;
    let mut reports = Vec::new();
    for check in &selected {
        let started = std::time::Instant::now();
        let mut batch = check.run(&model, &points, cfg);
        let elapsed = started.elapsed().as_millis() as u64;
        for rep in &mut batch {
            rep.wall_time_ms = elapsed;
        }
        reports.extend(batch);
    }
    Ok(SuiteReport {
        conventions: Conventions::default(),
        model: model.name.clone(),
        seed: cfg.seed,
        samples: cfg.samples,
        reports,
    })
}
