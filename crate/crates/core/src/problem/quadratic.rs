use nalgebra::{DMatrix, DVector};

use super::oracle::ComponentOracle;
use super::ProblemError;
use crate::linalg;

/// `f(x) = ½ xᵀP x − qᵀx + r` with `P` exactly symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticComponent {
    p: DMatrix<f64>,
    q: DVector<f64>,
    r: f64,
}

impl QuadraticComponent {
    /// Rejects non-square or non-symmetric `P` and mismatched `q`.
    pub fn new(p: DMatrix<f64>, q: DVector<f64>, r: f64) -> Result<Self, ProblemError> {
        if !p.is_square() || p.nrows() == 0 {
            return Err(ProblemError::BadParams(format!(
                "P must be a non-empty square matrix, got {}x{}",
                p.nrows(),
                p.ncols()
            )));
        }
        if q.len() != p.nrows() {
            return Err(ProblemError::DimensionMismatch {
                expected: p.nrows(),
                found: q.len(),
            });
        }
        if !linalg::is_exactly_symmetric(&p) {
            return Err(ProblemError::NotSymmetric);
        }
        if p.iter().chain(q.iter()).any(|v| !v.is_finite()) || !r.is_finite() {
            return Err(ProblemError::BadParams("non-finite coefficient".into()));
        }
        Ok(Self { p, q, r })
    }

    /// Like [`QuadraticComponent::new`] but replaces `P` by `(P + Pᵀ)/2`.
    pub fn symmetrized(p: DMatrix<f64>, q: DVector<f64>, r: f64) -> Result<Self, ProblemError> {
        if !p.is_square() {
            return Self::new(p, q, r);
        }
        Self::new(linalg::symmetrize(&p), q, r)
    }

    pub fn p(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn q(&self) -> &DVector<f64> {
        &self.q
    }

    pub fn r(&self) -> f64 {
        self.r
    }
}

impl ComponentOracle for QuadraticComponent {
    fn dim(&self) -> usize {
        self.q.len()
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(&self.p * x)) - self.q.dot(x) + self.r
    }

    fn gradient_into(&self, x: &DVector<f64>, out: &mut DVector<f64>) {
        out.gemv(1.0, &self.p, x, 0.0);
        *out -= &self.q;
    }

    fn hessian_into(&self, _x: &DVector<f64>, out: &mut DMatrix<f64>) {
        out.copy_from(&self.p);
    }

    fn as_quadratic(&self) -> Option<&QuadraticComponent> {
        Some(self)
    }
}
