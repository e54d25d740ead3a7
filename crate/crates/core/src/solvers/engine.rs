use nalgebra::{DMatrix, DVector};

use super::{all_finite, Method, RunTrace, SolverError, StepsizeSchedule};
use crate::linalg::max_abs;
use crate::problem::{check_permutation, ProblemInstance};

/// A run is aborted once any coordinate exceeds this magnitude.
pub const DIVERGENCE_LIMIT: f64 = 1e300;

/// What the solver reports after each cycle.
#[derive(Debug)]
pub struct CycleRecord<'a> {
    /// 1-based cycle index `k`.
    pub cycle: u64,
    pub alpha: f64,
    /// `x₁^k`.
    pub start: &'a DVector<f64>,
    /// `x₁^{k+1}`.
    pub end: &'a DVector<f64>,
    /// `x_1^k, …, x_m^k` when inner recording is on.
    pub inner: Option<&'a [DVector<f64>]>,
    /// `‖e^k‖`.
    pub grad_error_norm: f64,
    /// Largest component gradient norm evaluated during the cycle.
    pub max_grad_norm: f64,
}

pub trait CycleObserver {
    fn observe(&mut self, rec: &CycleRecord<'_>);
}

impl<F: FnMut(&CycleRecord<'_>)> CycleObserver for F {
    fn observe(&mut self, rec: &CycleRecord<'_>) {
        self(rec)
    }
}

pub fn identity_order(m: usize) -> Vec<usize> {
    (0..m).collect()
}

/// Order that starts at component `shift` and wraps around.
pub fn rotated_order(m: usize, shift: usize) -> Vec<usize> {
    (0..m).map(|i| (i + shift) % m).collect()
}

fn validate(
    problem: &ProblemInstance,
    x0: &DVector<f64>,
    cycles: u64,
    order: &[usize],
) -> Result<(), SolverError> {
    if cycles == 0 {
        return Err(SolverError::ZeroCycles);
    }
    if x0.len() != problem.dim() {
        return Err(SolverError::DimensionMismatch {
            expected: problem.dim(),
            found: x0.len(),
        });
    }
    if !all_finite(x0) {
        return Err(SolverError::NonFiniteStart);
    }
    check_permutation(order, problem.len()).map_err(|e| SolverError::InvalidOrder(e.to_string()))
}

fn diverged(x: &DVector<f64>) -> bool {
    !all_finite(x) || max_abs(x) > DIVERGENCE_LIMIT
}

/// `x ← x − α·d` with the rounding error of every addition kept in
/// `carry` (TwoSum) and fed into the next step. Late in a diminishing-step
/// run `α·d` falls below half an ulp of `x`; plain addition would then stall
/// the iterate at a distance set by the magnitude of `x` instead of the
/// method.
fn compensated_step(x: &mut DVector<f64>, carry: &mut DVector<f64>, alpha: f64, d: &DVector<f64>) {
    for ((xi, ci), di) in x.iter_mut().zip(carry.iter_mut()).zip(d.iter()) {
        let y = *ci - alpha * di;
        let t = *xi + y;
        let bp = t - *xi;
        *ci = (*xi - (t - bp)) + (y - bp);
        *xi = t;
    }
}

fn diff_norm(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(u, v)| (u - v) * (u - v))
        .sum::<f64>()
        .sqrt()
}

/// Incremental gradient driver: streams one [`CycleRecord`] per cycle to
/// `observer` and returns the final iterate.
///
/// Within cycle `k`, `x_{i+1} = x_i − α_k ∇f_{σ(i)}(x_i)`; the gradient error
/// `e^k = Σ_i ∇f_{σ(i)}(x₁^k) − ∇f_{σ(i)}(x_i^k)` is computed alongside.
#[allow(clippy::too_many_arguments)]
pub fn drive_ig(
    problem: &ProblemInstance,
    schedule: &StepsizeSchedule,
    x0: &DVector<f64>,
    cycles: u64,
    order: &[usize],
    record_inner: bool,
    observer: &mut dyn CycleObserver,
) -> Result<DVector<f64>, SolverError> {
    validate(problem, x0, cycles, order)?;
    let n = problem.dim();
    let m = order.len();
    let comps: Vec<_> = order.iter().map(|&i| problem.component(i)).collect();

    let mut x = x0.clone();
    let mut carry = DVector::zeros(n);
    let mut start = DVector::zeros(n);
    let mut g = DVector::zeros(n);
    let mut agg = DVector::zeros(n);
    let mut full = DVector::zeros(n);
    let mut inner: Vec<DVector<f64>> = if record_inner {
        vec![DVector::zeros(n); m]
    } else {
        Vec::new()
    };

    for k in 1..=cycles {
        let alpha = schedule.alpha(k);
        start.copy_from(&x);
        agg.fill(0.0);
        full.fill(0.0);
        let mut gmax = 0.0_f64;
        for (i, comp) in comps.iter().enumerate() {
            if record_inner {
                inner[i].copy_from(&x);
            }
            comp.gradient_into(&x, &mut g);
            gmax = gmax.max(g.norm());
            agg += &g;
            compensated_step(&mut x, &mut carry, alpha, &g);
        }
        for comp in &comps {
            comp.gradient_into(&start, &mut g);
            gmax = gmax.max(g.norm());
            full += &g;
        }
        observer.observe(&CycleRecord {
            cycle: k,
            alpha,
            start: &start,
            end: &x,
            inner: record_inner.then_some(inner.as_slice()),
            grad_error_norm: diff_norm(&full, &agg),
            max_grad_norm: gmax,
        });
        if diverged(&x) {
            return Err(SolverError::NonFinite {
                cycle: k,
                partial: None,
            });
        }
    }
    Ok(x)
}

/// Incremental Newton driver.
///
/// Keeps the raw accumulated Hessian `H` (starting from the identity and
/// carried across cycles); each inner step solves `(H/k) d = ∇f_i(x_i)` by
/// Cholesky and moves `x_{i+1} = x_i − α_k d`. The recorded error is the
/// Newton gradient error
/// `e^k = Σ_j ∇f_j(x_j) − ∇f_j(x₁) + (α_k k)^{-1} ∇²f_j(x_j)(x₁ − x_j)`,
/// which satisfies `x₁^{k+1} = x₁^k − α_k (H/k)^{-1}(∇f(x₁^k) + e^k)`.
pub fn drive_in(
    problem: &ProblemInstance,
    schedule: &StepsizeSchedule,
    x0: &DVector<f64>,
    cycles: u64,
    observer: &mut dyn CycleObserver,
) -> Result<DVector<f64>, SolverError> {
    let order = identity_order(problem.len());
    validate(problem, x0, cycles, &order)?;
    let n = problem.dim();

    let mut x = x0.clone();
    let mut carry = DVector::zeros(n);
    let mut start = DVector::zeros(n);
    let mut g = DVector::zeros(n);
    let mut diff = DVector::zeros(n);
    let mut err = DVector::zeros(n);
    let mut hess_i = DMatrix::zeros(n, n);
    let mut h = DMatrix::<f64>::identity(n, n);

    for k in 1..=cycles {
        let alpha = schedule.alpha(k);
        let kf = k as f64;
        start.copy_from(&x);
        err.fill(0.0);
        let mut gmax = 0.0_f64;
        for (i, comp) in problem.components().iter().enumerate() {
            comp.hessian_into(&x, &mut hess_i);
            comp.gradient_into(&x, &mut g);
            gmax = gmax.max(g.norm());
            h += &hess_i;

            diff.copy_from(&start);
            diff -= &x;
            err += &g;
            err.gemv(1.0 / (alpha * kf), &hess_i, &diff, 1.0);

            let averaged = &h / kf;
            let chol = averaged.cholesky().ok_or(SolverError::IndefiniteHessian {
                cycle: k,
                step: i + 1,
            })?;
            let step = chol.solve(&g);
            compensated_step(&mut x, &mut carry, alpha, &step);
        }
        for comp in problem.components() {
            comp.gradient_into(&start, &mut g);
            gmax = gmax.max(g.norm());
            err -= &g;
        }
        observer.observe(&CycleRecord {
            cycle: k,
            alpha,
            start: &start,
            end: &x,
            inner: None,
            grad_error_norm: err.norm(),
            max_grad_norm: gmax,
        });
        if diverged(&x) {
            return Err(SolverError::NonFinite {
                cycle: k,
                partial: None,
            });
        }
    }
    Ok(x)
}

fn attach_partial(err: SolverError, trace: RunTrace) -> SolverError {
    match err {
        SolverError::NonFinite { cycle, .. } => SolverError::NonFinite {
            cycle,
            partial: Some(Box::new(trace)),
        },
        other => other,
    }
}

/// Incremental gradient with a recorded trace. `order` is a 0-based
/// permutation of the components.
pub fn run_ig(
    problem: &ProblemInstance,
    schedule: &StepsizeSchedule,
    x0: &DVector<f64>,
    cycles: u64,
    order: &[usize],
    record_inner: bool,
) -> Result<RunTrace, SolverError> {
    validate(problem, x0, cycles, order)?;
    let mut trace = RunTrace::new(Method::Ig, *schedule, order.to_vec(), x0, cycles, record_inner);
    match drive_ig(problem, schedule, x0, cycles, order, record_inner, &mut trace) {
        Ok(_) => Ok(trace),
        Err(e) => Err(attach_partial(e, trace)),
    }
}

/// Incremental Newton with a recorded trace (identity order).
pub fn run_in(
    problem: &ProblemInstance,
    schedule: &StepsizeSchedule,
    x0: &DVector<f64>,
    cycles: u64,
) -> Result<RunTrace, SolverError> {
    let order = identity_order(problem.len());
    validate(problem, x0, cycles, &order)?;
    let mut trace = RunTrace::new(Method::In, *schedule, order, x0, cycles, false);
    match drive_in(problem, schedule, x0, cycles, &mut trace) {
        Ok(_) => Ok(trace),
        Err(e) => Err(attach_partial(e, trace)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{make_example, ExampleSpec, QuadraticComponent};
    use approx::assert_relative_eq;

    fn half_square(n: usize) -> ProblemInstance {
        ProblemInstance::from_quadratics(vec![QuadraticComponent::new(
            DMatrix::identity(n, n),
            DVector::zeros(n),
            0.0,
        )
        .unwrap()])
        .unwrap()
    }

    fn lower_pair() -> ProblemInstance {
        make_example(&ExampleSpec::LowerPair { l: 1.0 }).unwrap()
    }

    #[test]
    fn first_inner_step_lower_pair() {
        let prob = lower_pair();
        let sched = StepsizeSchedule::constant(0.5).unwrap();
        let tr = run_ig(&prob, &sched, &DVector::zeros(1), 1, &[0, 1], true).unwrap();
        assert_eq!(tr.inner(0, 1).unwrap(), &[0.5]);
    }

    #[test]
    fn gradient_error_lower_pair_by_hand() {
        let prob = lower_pair();
        let sched = StepsizeSchedule::constant(0.1).unwrap();
        let tr = run_ig(&prob, &sched, &DVector::zeros(1), 1, &[0, 1], false).unwrap();
        // e = ∇f₂(0) − ∇f₂(0.1) = −0.1
        assert_relative_eq!(tr.grad_error_norms()[0], 0.1, epsilon = 1e-15);
    }

    #[test]
    fn slow_conv_closed_form_recursion() {
        let prob = make_example(&ExampleSpec::SlowConv).unwrap();
        let sched = StepsizeSchedule::new(1.0, 1.0).unwrap();
        let tr = run_ig(&prob, &sched, &DVector::from_element(1, 1.0), 200, &[0, 1], false).unwrap();
        let mut x = 1.0_f64;
        for k in 1..=200u64 {
            assert_relative_eq!(tr.outer(k as usize - 1)[0], x, max_relative = 1e-13);
            let f = 1.0 - 1.0 / (10.0 * k as f64);
            x *= f * f;
        }
        assert_relative_eq!(tr.final_iterate()[0], x, max_relative = 1e-13);
    }

    #[test]
    fn single_component_has_zero_gradient_error() {
        let prob = half_square(3);
        for s in [0.0, 0.5, 1.0] {
            let sched = StepsizeSchedule::new(0.7, s).unwrap();
            let x0 = DVector::from_vec(vec![1.0, -2.0, 0.5]);
            let tr = run_ig(&prob, &sched, &x0, 50, &[0], false).unwrap();
            assert!(tr.grad_error_norms().iter().all(|&e| e == 0.0));
        }
    }

    #[test]
    fn newton_first_two_cycles_by_hand() {
        let prob = half_square(1);
        let sched = StepsizeSchedule::new(1.0, 1.0).unwrap();
        let tr = run_in(&prob, &sched, &DVector::from_element(1, 1.0), 2).unwrap();
        assert_eq!(tr.outer(1)[0], 0.5);
        assert_relative_eq!(tr.final_iterate()[0], 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn newton_twenty_cycle_hand_recursion() {
        // H after cycle k is k + 1, so H̄ = (k+1)/k and x ← x·(1 − (1/k)·k/(k+1)).
        let prob = half_square(2);
        let sched = StepsizeSchedule::new(1.0, 1.0).unwrap();
        let x0 = DVector::from_vec(vec![1.0, -3.0]);
        let tr = run_in(&prob, &sched, &x0, 20).unwrap();
        let mut x = x0.clone();
        for k in 1..=20usize {
            assert_relative_eq!(tr.outer_vector(k - 1), x, max_relative = 1e-14);
            let kf = k as f64;
            x *= 1.0 - (1.0 / kf) * kf / (kf + 1.0);
        }
        assert_relative_eq!(*tr.final_iterate(), x, max_relative = 1e-14);
        // x_1^k = x_0 / k
        assert_relative_eq!(tr.final_iterate()[0], 1.0 / 21.0, max_relative = 1e-13);
    }

    #[test]
    fn newton_error_identity_holds() {
        let prob = make_example(&ExampleSpec::Random { n: 3, m: 3, c: 1.0, l: 6.0, seed: 4 }).unwrap();
        let sched = StepsizeSchedule::new(2.0, 1.0).unwrap();
        let x0 = DVector::from_element(3, 1.0);
        let mut h = DMatrix::<f64>::identity(3, 3);
        let mut checked = 0;
        drive_in(&prob, &sched, &x0, 30, &mut |rec: &CycleRecord<'_>| {
            for c in prob.components() {
                h += c.hessian(rec.start);
            }
            let hbar = &h / rec.cycle as f64;
            // Recover e^k from the outer step and compare norms.
            let step = (rec.start - rec.end) / rec.alpha;
            let e = &hbar * step - prob.gradient(rec.start);
            assert_relative_eq!(e.norm(), rec.grad_error_norm, max_relative = 1e-8, epsilon = 1e-12);
            checked += 1;
        })
        .unwrap();
        assert_eq!(checked, 30);
    }

    #[test]
    fn divergence_keeps_partial_trace() {
        let prob = lower_pair();
        let sched = StepsizeSchedule::constant(3.0).unwrap();
        let err = run_ig(&prob, &sched, &DVector::zeros(1), 100_000, &[0, 1], false).unwrap_err();
        match err {
            SolverError::NonFinite { cycle, partial } => {
                let tr = partial.expect("partial trace");
                assert_eq!(tr.cycles() as u64, cycle);
                assert!(cycle < 1000);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn input_validation() {
        let prob = lower_pair();
        let sched = StepsizeSchedule::constant(0.1).unwrap();
        let x0 = DVector::zeros(1);
        assert!(matches!(run_ig(&prob, &sched, &x0, 0, &[0, 1], false), Err(SolverError::ZeroCycles)));
        assert!(matches!(
            run_ig(&prob, &sched, &DVector::zeros(2), 5, &[0, 1], false),
            Err(SolverError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            run_ig(&prob, &sched, &x0, 5, &[1, 1], false),
            Err(SolverError::InvalidOrder(_))
        ));
        assert!(matches!(
            run_ig(&prob, &sched, &DVector::from_element(1, f64::NAN), 5, &[0, 1], false),
            Err(SolverError::NonFiniteStart)
        ));
    }

    #[test]
    fn rotated_orders() {
        assert_eq!(rotated_order(4, 1), vec![1, 2, 3, 0]);
        assert_eq!(rotated_order(3, 0), identity_order(3));
    }
}
