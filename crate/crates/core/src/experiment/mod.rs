//! Experiment orchestration: configuration, initial data, snapshots and the
//! `run`, `sweep`, `check` and `norms` entry points used by the command-line
//! tool.

pub mod check;
pub mod config;
pub mod initial;
pub mod norms;
pub mod runner;
pub mod snapshot;

use std::path::PathBuf;

use thiserror::Error;

use crate::besov::BesovError;
use crate::diagnostics::DiagnosticsError;
use crate::model::ModelError;
use crate::spectral::SpectralError;
use crate::timestep::StepError;

pub use config::{load_config, parse_config, ConfigError, ExperimentConfig, InitialKind, InitialSpec};
pub use initial::{make_initial_data, smallness_norm};
pub use runner::{output_dir, run, sweep, RunOutcome, SweepRow, OUTPUT_ROOT_ENV};
pub use snapshot::{load_snapshot, save_snapshot, Snapshot, SnapshotError};

/// Process exit status for a successful command.
pub const EXIT_OK: i32 = 0;
/// Exit status when a run or check fails.
pub const EXIT_RUN_FAILURE: i32 = 1;
/// Exit status for invalid configuration or input.
pub const EXIT_CONFIG_ERROR: i32 = 2;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Setup(String),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
    #[error(transparent)]
    Besov(#[from] BesovError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },
    #[error("run in {} failed: {message}", dir.display())]
    RunFailed { dir: PathBuf, message: String },
    #[error(transparent)]
    Step(#[from] StepError),
}

impl ExperimentError {
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Config(_)
            | ExperimentError::Setup(_)
            | ExperimentError::Spectral(_)
            | ExperimentError::Snapshot(_)
            | ExperimentError::Besov(_) => EXIT_CONFIG_ERROR,
            _ => EXIT_RUN_FAILURE,
        }
    }

    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        ExperimentError::Io {
            context: context.into(),
            source,
        }
    }
}
