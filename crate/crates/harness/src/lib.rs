//! Walking and joint-tuning scenarios for the planar biped, with CSV
//! telemetry and JSON configuration.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod rigs;
pub mod scenario;
pub mod telemetry;
pub mod walker;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use config::{ScenarioConfig, ScenarioId};
pub use scenario::{run_scenario, Outcome, RunOutput, RunSummary};
pub use telemetry::{write_telemetry, TelemetryRecord};
pub use walker::{detect_exchange, detect_fall, walker_tick, WalkerState};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("telemetry: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Physics(#[from] simbiped_physics::PhysicsError),
}

impl HarnessError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io { path: path.to_path_buf(), source }
    }
}
