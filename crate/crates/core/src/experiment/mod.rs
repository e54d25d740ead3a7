//! Experiment plumbing behind the `incro` binary: config files, trace and
//! report writers, single runs, presets and stepsize sweeps.

mod config;
mod output;
mod presets;
mod run;
mod sweep;

use std::path::PathBuf;

use thiserror::Error;

use crate::analysis::AnalysisError;
use crate::problem::ProblemError;
use crate::solvers::{RunTrace, SolverError};

pub use config::{ExperimentConfig, OrderSpec, ProblemSpec, X0Spec};
pub use output::{report_jsonl, sweep_csv, trace_csv, write_trace_csv, TRACE_HEADER, SWEEP_HEADER};
pub use presets::{run_preset, ComplexityPoint, PresetOutcome, PresetRun, PRESET_NAMES};
pub use run::{build_order, build_problem, build_x0, execute, execute_on, run_config, RunOutcome};
pub use sweep::{sweep, RowStatus, SweepRow};

/// Process exit codes.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const VERDICT_FAILURE: i32 = 1;
    pub const CONFIG_ERROR: i32 = 2;
    pub const DIVERGENCE: i32 = 3;
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("{0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Solver(SolverError),
    #[error("run diverged during cycle {cycle}")]
    Diverged {
        cycle: u64,
        partial: Option<Box<RunTrace>>,
    },
    #[error("unknown preset '{0}'")]
    UnknownPreset(String),
}

impl From<SolverError> for ExperimentError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::NonFinite { cycle, partial } => ExperimentError::Diverged { cycle, partial },
            SolverError::ZeroCycles => ExperimentError::Config(e.to_string()),
            other => ExperimentError::Solver(other),
        }
    }
}

impl ExperimentError {
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Diverged { .. } => exit::DIVERGENCE,
            _ => exit::CONFIG_ERROR,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        ExperimentError::Io {
            path: path.into(),
            source,
        }
    }
}
