//! Scenario runner for `fanning-lab-core`: reads a JSON scenario, runs one
//! experiment and writes a CSV table plus a JSON summary.

pub mod config;
pub mod experiments;
pub mod fuzzing;
pub mod output;

use std::path::{Path, PathBuf};

use fanning_lab_core::GeomError;

pub use config::ScenarioConfig;
pub use output::Summary;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numeric failure in {context}: {source}")]
    Numeric {
        context: String,
        #[source]
        source: GeomError,
    },
    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    /// Process exit status: 2 for configuration and output problems, 3 for
    /// numeric failures. A tolerance violation (1) is not an error.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Output(_) => 2,
            CliError::Numeric { .. } => 3,
        }
    }
}

pub const EXIT_OK: u8 = 0;
pub const EXIT_TOLERANCE: u8 = 1;

/// Reads and validates a config file.
pub fn load_config(path: &Path) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    ScenarioConfig::from_json(&text)
}

/// Result of [`run`] with the files it wrote.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub summary: Summary,
    pub csv_path: PathBuf,
    pub summary_path: PathBuf,
}

impl RunReport {
    pub fn exit_code(&self) -> u8 {
        if self.summary.passed {
            EXIT_OK
        } else {
            EXIT_TOLERANCE
        }
    }
}

/// Runs the scenario and writes its outputs into `out_dir`.
pub fn run(cfg: &ScenarioConfig, out_dir: &Path) -> Result<RunReport, CliError> {
    cfg.validate()?;
    let outcome = experiments::run(cfg)?;
    let summary = Summary {
        name: cfg.name.clone(),
        experiment: cfg.experiment.kind().into(),
        seed: cfg.seed,
        rows: outcome.table.rows.len(),
        csv: format!("{}.csv", cfg.name),
        max_residuals: outcome.max_residuals.into_iter().collect(),
        passed: outcome.checks.iter().all(|c| c.passed),
        checks: outcome.checks,
    };
    let (csv_path, summary_path) = output::write_outputs(out_dir, &cfg.name, &outcome.table, &summary)?;
    Ok(RunReport { summary, csv_path, summary_path })
}
