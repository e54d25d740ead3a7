//! Incremental gradient and incremental Newton iterations.
//!
//! Both methods process the components one at a time in a fixed cyclic
//! order. A *cycle* `k` is one full pass; the stepsize `α_k` is held fixed
//! across the `m` inner steps of the cycle.

mod empirical;
mod engine;
mod schedule;
mod trace;

use nalgebra::DVector;
use thiserror::Error;

pub use empirical::empirical_e;
pub use engine::{
    drive_ig, drive_in, identity_order, rotated_order, run_ig, run_in, CycleObserver, CycleRecord,
    DIVERGENCE_LIMIT,
};
pub use schedule::StepsizeSchedule;
pub use trace::{Method, RunTrace};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid stepsize schedule: {0}")]
    BadSchedule(String),
    #[error("cycles must be ≥ 1")]
    ZeroCycles,
    #[error("starting point has dimension {found}, problem has {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("starting point has non-finite entries")]
    NonFiniteStart,
    #[error("invalid order: {0}")]
    InvalidOrder(String),
    #[error("iterates left the finite range during cycle {cycle}")]
    NonFinite {
        cycle: u64,
        /// Trace recorded up to and including the failing cycle, when the
        /// caller asked for one.
        partial: Option<Box<RunTrace>>,
    },
    #[error("averaged Hessian is not positive definite at cycle {cycle}, inner step {step}")]
    IndefiniteHessian { cycle: u64, step: usize },
    #[error("operation requires a quadratic problem")]
    NonQuadratic,
    #[error("operation requires an incremental gradient trace")]
    MethodMismatch,
}

pub(crate) fn all_finite(v: &DVector<f64>) -> bool {
    v.iter().all(|x| x.is_finite())
}
