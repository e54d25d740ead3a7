//! Turns traces into numbers that can be checked against the rate bounds:
//! distance sequences, log-log exponent fits, tail maxima standing in for
//! `limsup`, bound verdicts and a simulator for Chung-type recursions.

mod chung;
mod distance;
mod fit;
mod report;
mod verdict;

use thiserror::Error;

use crate::problem::ProblemError;
use crate::solvers::SolverError;

pub use chung::{chung_simulate, ChungBranch, ChungOutcome, ChungParams};
pub use distance::{distance_trace, star_norm, Norm, NormKind};
pub use fit::{fit_rate_exponent, growth_exponent, tail_limsup, tail_window, RateFit, CLIP_FLOOR, MIN_TAIL_POINTS};
pub use report::{bound_verdicts, claims, RateReport, ReportConstants, VerdictConfig};
pub use verdict::{Comparison, Verdict};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("tail window holds {points} points, need at least {MIN_TAIL_POINTS}")]
    DegenerateTail { points: usize },
    #[error("tail fraction must lie in (0, 1], got {0}")]
    BadTailFraction(f64),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}
