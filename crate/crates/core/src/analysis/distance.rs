use nalgebra::DMatrix;
use serde::Serialize;

use super::AnalysisError;
use crate::solvers::RunTrace;

/// Norm selector without attached data, as it appears in configs and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    #[default]
    Euclid,
    Star,
}

impl NormKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NormKind::Euclid => "euclid",
            NormKind::Star => "star",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Norm<'a> {
    Euclid,
    /// `‖z‖_* = (zᵀ H z)^{1/2}` for a positive definite `H`.
    Star(&'a DMatrix<f64>),
}

/// `dist_k = ‖x₁^k − x*‖` for `k = 1..=K`.
pub fn distance_trace(trace: &RunTrace, x_star: &[f64], norm: Norm<'_>) -> Result<Vec<f64>, AnalysisError> {
    let n = trace.dim();
    if x_star.len() != n {
        return Err(AnalysisError::DimensionMismatch {
            expected: n,
            found: x_star.len(),
        });
    }
    if let Norm::Star(h) = norm {
        if h.nrows() != n || h.ncols() != n {
            return Err(AnalysisError::DimensionMismatch {
                expected: n,
                found: h.nrows(),
            });
        }
        if h.clone().cholesky().is_none() {
            return Err(AnalysisError::BadParams("star norm needs a positive definite matrix".into()));
        }
    }
    let mut z = vec![0.0; n];
    let out = (0..trace.cycles())
        .map(|idx| {
            for (zi, (x, s)) in z.iter_mut().zip(trace.outer(idx).iter().zip(x_star)) {
                *zi = x - s;
            }
            match norm {
                Norm::Euclid => z.iter().map(|v| v * v).sum::<f64>().sqrt(),
                Norm::Star(h) => star_norm(h, &z),
            }
        })
        .collect();
    Ok(out)
}

/// `(zᵀ H z)^{1/2}` through the quadratic form; tiny negative round-off is clamped.
pub fn star_norm(h: &DMatrix<f64>, z: &[f64]) -> f64 {
    let n = z.len();
    let mut quad = 0.0;
    for col in 0..n {
        let mut hz = 0.0;
        for row in 0..n {
            hz += h[(row, col)] * z[row];
        }
        quad += z[col] * hz;
    }
    quad.max(0.0).sqrt()
}
