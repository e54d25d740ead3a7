use std::ops::Range;

use serde::Serialize;

use super::AnalysisError;

/// Smallest tail that a fit or tail maximum is computed on.
pub const MIN_TAIL_POINTS: usize = 10;
/// Zero distances are raised to this value before taking logarithms.
pub const CLIP_FLOOR: f64 = 1e-300;

/// Least-squares fit of `log dist_k = log ĉ − ŝ log k` over a tail window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub exponent: f64,
    pub coefficient: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
    /// First cycle (1-based) inside the window.
    pub first_cycle: usize,
    pub points: usize,
    /// Some entries were zero and got clipped.
    pub clipped: bool,
}

/// Index range of the final `tail_fraction` of `len` entries.
pub fn tail_window(len: usize, tail_fraction: f64) -> Result<Range<usize>, AnalysisError> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(AnalysisError::BadTailFraction(tail_fraction));
    }
    let start = (len as f64 * (1.0 - tail_fraction)).floor() as usize;
    let start = start.min(len);
    if len - start < MIN_TAIL_POINTS {
        return Err(AnalysisError::DegenerateTail { points: len - start });
    }
    Ok(start..len)
}

/// Fits `(ln k, ln v)` pairs; returns (slope, intercept, rms residual).
fn line_fit(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(x, y) in points {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = points
        .iter()
        .map(|&(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    (slope, intercept, (ss / n).sqrt())
}

/// Fits `dist_k ≈ ĉ k^{−ŝ}` over the last `tail_fraction` of the sequence,
/// where `dist[i]` belongs to cycle `k = i + 1`.
pub fn fit_rate_exponent(dist: &[f64], tail_fraction: f64) -> Result<RateFit, AnalysisError> {
    let window = tail_window(dist.len(), tail_fraction)?;
    let mut clipped = false;
    let points: Vec<(f64, f64)> = window
        .clone()
        .map(|i| {
            let v = dist[i];
            let v = if v < CLIP_FLOOR {
                clipped = true;
                CLIP_FLOOR
            } else {
                v
            };
            (((i + 1) as f64).ln(), v.ln())
        })
        .collect();
    let (slope, intercept, residual) = line_fit(&points);
    Ok(RateFit {
        exponent: -slope,
        coefficient: intercept.exp(),
        residual,
        first_cycle: window.start + 1,
        points: points.len(),
        clipped,
    })
}

/// `max k^t · dist_k` over the tail window.
pub fn tail_limsup(dist: &[f64], t: f64, tail_fraction: f64) -> Result<f64, AnalysisError> {
    let window = tail_window(dist.len(), tail_fraction)?;
    Ok(window
        .map(|i| ((i + 1) as f64).powf(t) * dist[i])
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Log-log growth rate of positive `values[i]` sampled at `ks[i]` over the
/// tail window: the negated fitted exponent. A bounded sequence has growth
/// near or below zero.
pub fn growth_exponent(ks: &[f64], values: &[f64], tail_fraction: f64) -> Result<f64, AnalysisError> {
    if ks.len() != values.len() {
        return Err(AnalysisError::DimensionMismatch {
            expected: ks.len(),
            found: values.len(),
        });
    }
    let window = tail_window(values.len(), tail_fraction)?;
    let points: Vec<(f64, f64)> = window
        .map(|i| (ks[i].ln(), values[i].max(CLIP_FLOOR).ln()))
        .collect();
    Ok(line_fit(&points).0)
}
