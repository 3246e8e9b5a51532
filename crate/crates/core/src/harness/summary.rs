use serde::Serialize;

use super::config::ExperimentConfig;
use super::suite::SuiteReport;
use super::trial::ExperimentResult;

#[derive(Debug, Clone, Serialize)]
pub struct Versions {
    pub crate_version: &'static str,
    pub format: u32,
}

pub const VERSIONS: Versions = Versions { crate_version: env!("CARGO_PKG_VERSION"), format: 1 };

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSummary {
    pub label: String,
    pub config: ExperimentConfig,
    pub final_regrets: Vec<f64>,
    pub hindsight_losses: Vec<f64>,
    pub mean_final_average_regret: f64,
    pub blocks: Vec<u32>,
    pub warnings: Vec<String>,
    pub suites: Vec<SuiteReport>,
    pub wall_clock_seconds: f64,
    pub versions: Versions,
}

impl ExperimentSummary {
    pub fn new(label: &str, config: &ExperimentConfig, result: &ExperimentResult, wall_clock_seconds: f64) -> Self {
        Self {
            label: label.into(),
            config: config.clone(),
            final_regrets: result.trials.iter().map(|t| t.final_regret()).collect(),
            hindsight_losses: result.trials.iter().map(|t| t.hindsight_loss).collect(),
            mean_final_average_regret: result.mean_final_average_regret(),
            blocks: result.trials.iter().map(|t| t.blocks).collect(),
            warnings: result.warnings().map(|(i, w)| format!("trial {i}: {w}")).collect(),
            suites: Vec::new(),
            wall_clock_seconds,
            versions: VERSIONS,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}
