use super::{Method, RunTrace, SolverError};
use crate::problem::ProblemInstance;

/// Recovers `E_k = (x₁^{k+1} − (I − α_k P)x₁^k − α_k Σq_i) / α_k²` from
/// consecutive outer iterates of an IG trace and returns `‖E_k‖` per cycle.
/// The maximum over `k` is the measured stand-in for `M∞`.
pub fn empirical_e(problem: &ProblemInstance, trace: &RunTrace) -> Result<Vec<f64>, SolverError> {
    if trace.method() != Method::Ig {
        return Err(SolverError::MethodMismatch);
    }
    let p = problem.p_sum().map_err(|_| SolverError::NonQuadratic)?;
    let q = problem.q_sum().map_err(|_| SolverError::NonQuadratic)?;
    let n = problem.dim();
    if trace.dim() != n {
        return Err(SolverError::DimensionMismatch {
            expected: n,
            found: trace.dim(),
        });
    }
    let mut out = Vec::with_capacity(trace.cycles());
    let mut buf = vec![0.0; n];
    for idx in 0..trace.cycles() {
        let alpha = trace.alphas()[idx];
        let cur = trace.outer(idx);
        let next = trace.next_outer(idx);
        for (row, b) in buf.iter_mut().enumerate() {
            let px: f64 = (0..n).map(|col| p[(row, col)] * cur[col]).sum();
            *b = next[row] - cur[row] + alpha * (px - q[row]);
        }
        let norm = buf.iter().map(|v| v * v).sum::<f64>().sqrt();
        out.push(norm / (alpha * alpha));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{make_example, ExampleSpec, QuadraticComponent};
    use crate::solvers::{run_ig, run_in, StepsizeSchedule};
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn single_component_has_no_cross_terms() {
        let prob = ProblemInstance::from_quadratics(vec![QuadraticComponent::new(
            DMatrix::identity(2, 2) * 0.5,
            DVector::from_vec(vec![1.0, 2.0]),
            0.0,
        )
        .unwrap()])
        .unwrap();
        let sched = StepsizeSchedule::new(1.0, 0.5).unwrap();
        let tr = run_ig(&prob, &sched, &DVector::from_element(2, 3.0), 100, &[0], false).unwrap();
        let e = empirical_e(&prob, &tr).unwrap();
        assert!(e.iter().all(|&v| v.abs() < 1e-9), "{:?}", &e[..5]);
    }

    #[test]
    fn lower_pair_tends_to_m() {
        let prob = make_example(&ExampleSpec::LowerPair { l: 1.0 }).unwrap();
        let m = prob.constants().unwrap().m;
        let sched = StepsizeSchedule::new(1.0, 1.0).unwrap();
        let tr = run_ig(&prob, &sched, &DVector::zeros(1), 10_000, &[0, 1], false).unwrap();
        let e = empirical_e(&prob, &tr).unwrap();
        let tail = e[e.len() - 1];
        assert!((tail - m).abs() <= 0.05 * m, "tail {tail} vs M {m}");
    }

    #[test]
    fn octet_cancellation_drives_e_to_zero() {
        let prob = make_example(&ExampleSpec::Octet).unwrap();
        let sched = StepsizeSchedule::new(1.0, 0.5).unwrap();
        let order: Vec<usize> = (0..8).collect();
        let tr = run_ig(&prob, &sched, &DVector::from_element(2, 1.0), 20_000, &order, false).unwrap();
        let e = empirical_e(&prob, &tr).unwrap();
        assert!(e[e.len() - 1] < 0.05, "{}", e[e.len() - 1]);
        assert!(e[e.len() - 1] < e[100]);
    }

    #[test]
    fn rejects_newton_traces() {
        let prob = make_example(&ExampleSpec::LowerPair { l: 1.0 }).unwrap();
        let sched = StepsizeSchedule::new(2.0, 1.0).unwrap();
        let tr = run_in(&prob, &sched, &DVector::zeros(1), 5).unwrap();
        assert!(matches!(empirical_e(&prob, &tr), Err(SolverError::MethodMismatch)));
    }
}
