use nalgebra::DVector;
use serde::Serialize;

use super::{CycleObserver, CycleRecord, StepsizeSchedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ig,
    In,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Ig => "ig",
            Method::In => "in",
        }
    }
}

/// Per-cycle record of a solver run. Cycle `k` (1-based) lives at index
/// `k − 1`.
#[derive(Debug, Clone)]
pub struct RunTrace {
    method: Method,
    schedule: StepsizeSchedule,
    order: Vec<usize>,
    dim: usize,
    outer: Vec<f64>,
    alphas: Vec<f64>,
    grad_error_norms: Vec<f64>,
    inner: Option<Vec<f64>>,
    final_iterate: DVector<f64>,
    max_grad_norm: f64,
}

impl RunTrace {
    pub(crate) fn new(
        method: Method,
        schedule: StepsizeSchedule,
        order: Vec<usize>,
        x0: &DVector<f64>,
        cycles: u64,
        record_inner: bool,
    ) -> Self {
        let dim = x0.len();
        let cap = usize::try_from(cycles).unwrap_or(usize::MAX).min(1 << 24);
        Self {
            method,
            schedule,
            dim,
            outer: Vec::with_capacity(cap.saturating_mul(dim)),
            alphas: Vec::with_capacity(cap),
            grad_error_norms: Vec::with_capacity(cap),
            inner: record_inner.then(Vec::new),
            final_iterate: x0.clone(),
            max_grad_norm: 0.0,
            order,
        }
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn schedule(&self) -> &StepsizeSchedule {
        &self.schedule
    }

    /// Processing order as a 0-based permutation.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn is_identity_order(&self) -> bool {
        self.order.iter().enumerate().all(|(i, &o)| i == o)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cycles(&self) -> usize {
        self.alphas.len()
    }

    /// `x₁^k` for `k = idx + 1`.
    pub fn outer(&self, idx: usize) -> &[f64] {
        &self.outer[idx * self.dim..(idx + 1) * self.dim]
    }

    /// `x₁^{k+1}` for `k = idx + 1`; the last one is the final iterate.
    pub fn next_outer(&self, idx: usize) -> &[f64] {
        if idx + 1 < self.cycles() {
            self.outer(idx + 1)
        } else {
            self.final_iterate.as_slice()
        }
    }

    pub fn outer_vector(&self, idx: usize) -> DVector<f64> {
        DVector::from_column_slice(self.outer(idx))
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn grad_error_norms(&self) -> &[f64] {
        &self.grad_error_norms
    }

    /// Inner iterate `x_i^k` (`i` 0-based within the cycle), if recorded.
    pub fn inner(&self, idx: usize, i: usize) -> Option<&[f64]> {
        let m = self.order.len();
        self.inner.as_ref().map(|v| {
            let start = (idx * m + i) * self.dim;
            &v[start..start + self.dim]
        })
    }

    pub fn has_inner(&self) -> bool {
        self.inner.is_some()
    }

    /// `x₁^{K+1}`.
    pub fn final_iterate(&self) -> &DVector<f64> {
        &self.final_iterate
    }

    /// Largest component gradient norm evaluated anywhere along the run.
    pub fn max_grad_norm(&self) -> f64 {
        self.max_grad_norm
    }
}

impl CycleObserver for RunTrace {
    fn observe(&mut self, rec: &CycleRecord<'_>) {
        self.outer.extend_from_slice(rec.start.as_slice());
        self.alphas.push(rec.alpha);
        self.grad_error_norms.push(rec.grad_error_norm);
        if let (Some(buf), Some(inner)) = (self.inner.as_mut(), rec.inner) {
            for x in inner {
                buf.extend_from_slice(x.as_slice());
            }
        }
        self.final_iterate.copy_from(rec.end);
        self.max_grad_norm = self.max_grad_norm.max(rec.max_grad_norm);
    }
}
