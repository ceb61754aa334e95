//! Batch driver: reads a flat config, runs one experiment ladder, writes
//! `results.csv` and `manifest.txt`.

pub mod config;
pub mod experiments;
pub mod output;

use std::collections::BTreeMap;
use std::path::PathBuf;

pub use config::Config;
pub use experiments::Experiment;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

/// Everything one run needs.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub config: Config,
    pub out: PathBuf,
    pub seed: u64,
    pub tol: Option<f64>,
}

/// Runs the experiment and writes its artifacts. `Ok(true)` iff every
/// verdict passed.
pub fn run_experiment(mut cfg: ExperimentConfig) -> Result<bool, CliError> {
    if let Some(tol) = cfg.tol {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(CliError::Config(format!("tolerance {tol} must be positive")));
        }
        cfg.config.set("tol", tol);
    }
    let outcome = experiments::run(cfg.experiment, &mut cfg.config, cfg.seed)?;
    std::fs::create_dir_all(&cfg.out).map_err(|e| CliError::Io(format!("{}: {e}", cfg.out.display())))?;
    outcome.table.write_csv(&cfg.out.join("results.csv"))?;

    let mut run = BTreeMap::new();
    run.insert("experiment".to_string(), cfg.experiment.name().to_string());
    run.insert("version".to_string(), env!("CARGO_PKG_VERSION").to_string());
    run.insert("seed".to_string(), cfg.seed.to_string());
    let mut results = outcome.notes.clone();
    results.insert("rows".to_string(), outcome.table.rows.len().to_string());
    results.insert("verdict".to_string(), if outcome.pass { "pass" } else { "fail" }.to_string());
    output::write_manifest(
        &cfg.out.join("manifest.txt"),
        &[("run", &run), ("knobs", cfg.config.knobs()), ("results", &results)],
    )?;
    Ok(outcome.pass)
}
