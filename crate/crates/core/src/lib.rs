//! Incremental gradient (IG) and incremental Newton (IN) methods for
//! minimizing a finite sum of smooth convex components whose sum is strongly
//! convex, together with the instrumentation needed to measure their
//! convergence rates against closed-form constants.
//!
//! The crate is split into four layers:
//!
//! * [`problem`]: component oracles, exact quadratic instances and their
//!   constants (minimizer, strong convexity, Lipschitz sum, `M`, `B`).
//! * [`solvers`]: the IG and IN iterations with per-cycle instrumentation.
//! * [`analysis`]: distance sequences, log-log exponent fits, tail limsup
//!   proxies, bound verdicts and a simulator for Chung-type recursions.
//! * [`experiment`]: configuration files, trace/report writers, presets and
//!   sweeps used by the `incro` binary.

pub mod analysis;
pub mod experiment;
pub mod linalg;
pub mod problem;
pub mod solvers;


pub use analysis::{RateReport, Verdict};
pub use problem::{ComponentOracle, ExampleSpec, ProblemInstance, QuadraticComponent};
pub use solvers::{Method, RunTrace, StepsizeSchedule};
