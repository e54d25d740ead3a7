use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::quadratic::QuadraticComponent;
use super::sampling::sample_in_ball;

/// One summand `f_i` of the finite-sum objective.
///
/// The `*_into` methods write into caller-owned buffers so the solvers can
/// run millions of inner steps without allocating.
pub trait ComponentOracle: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    fn value(&self, x: &DVector<f64>) -> f64;

    fn gradient_into(&self, x: &DVector<f64>, out: &mut DVector<f64>);

    /// Writes the (symmetric) Hessian at `x` into `out`.
    fn hessian_into(&self, x: &DVector<f64>, out: &mut DMatrix<f64>);

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim());
        self.gradient_into(x, &mut out);
        out
    }

    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let n = self.dim();
        let mut out = DMatrix::zeros(n, n);
        self.hessian_into(x, &mut out);
        out
    }

    /// Closed form, when the component is a quadratic.
    fn as_quadratic(&self) -> Option<&QuadraticComponent> {
        None
    }
}

/// Threshold above which [`check_oracle_consistency`] flags an oracle.
pub const ORACLE_RELERR_THRESHOLD: f64 = 1e-5;

const FD_STEP: f64 = 1e-5;
const RELERR_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleReport {
    pub samples: usize,
    /// max over samples of ‖∇f − FD(f)‖ / ‖FD(f)‖.
    pub max_grad_relerr: f64,
    /// max over samples of ‖∇²f − FD(∇f)‖_F / ‖FD(∇f)‖_F.
    pub max_hess_relerr: f64,
}

impl OracleReport {
    pub fn flagged(&self) -> bool {
        !(self.max_grad_relerr <= ORACLE_RELERR_THRESHOLD
            && self.max_hess_relerr <= ORACLE_RELERR_THRESHOLD)
    }
}

/// Compares the gradient against central differences of the value, and the
/// Hessian against central differences of the gradient, at `samples` seeded
/// points drawn uniformly from the unit ball.
pub fn check_oracle_consistency(
    oracle: &dyn ComponentOracle,
    samples: usize,
    seed: u64,
) -> OracleReport {
    let n = oracle.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_grad = 0.0_f64;
    let mut max_hess = 0.0_f64;

    let mut grad = DVector::zeros(n);
    let mut hess = DMatrix::zeros(n, n);
    let mut g_plus = DVector::zeros(n);
    let mut g_minus = DVector::zeros(n);

    for _ in 0..samples {
        let x = sample_in_ball(&mut rng, n, 1.0);
        oracle.gradient_into(&x, &mut grad);
        oracle.hessian_into(&x, &mut hess);

        let mut fd_grad = DVector::zeros(n);
        let mut fd_hess = DMatrix::zeros(n, n);
        for j in 0..n {
            let h = FD_STEP * x[j].abs().max(1.0);
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            let width = xp[j] - xm[j];
            fd_grad[j] = (oracle.value(&xp) - oracle.value(&xm)) / width;
            oracle.gradient_into(&xp, &mut g_plus);
            oracle.gradient_into(&xm, &mut g_minus);
            let col = (&g_plus - &g_minus) / width;
            fd_hess.set_column(j, &col);
        }
        let g_err = (&grad - &fd_grad).norm() / fd_grad.norm().max(RELERR_FLOOR);
        let h_err = (&hess - &fd_hess).norm() / fd_hess.norm().max(RELERR_FLOOR);
        max_grad = max_grad.max(g_err);
        max_hess = max_hess.max(h_err);
    }

    OracleReport {
        samples,
        max_grad_relerr: max_grad,
        max_hess_relerr: max_hess,
    }
}
