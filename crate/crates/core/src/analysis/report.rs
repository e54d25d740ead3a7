use serde::Serialize;

use super::distance::{distance_trace, Norm, NormKind};
use super::fit::{fit_rate_exponent, growth_exponent, tail_limsup, RateFit};
use super::{AnalysisError, Comparison, Verdict};
use crate::problem::ProblemInstance;
use crate::solvers::{empirical_e, Method, RunTrace};

/// Claim identifiers used in reports.
pub mod claims {
    /// `s = 1, Rc > 1`: tail max of `k·dist_k` against `R²M/(Rc − 1)`.
    pub const IG_INVERSE_K: &str = "ig_inverse_k_bound";
    /// `0 < s < 1`: tail max of `k^s·dist_k` against `RM/c`.
    pub const IG_POWER: &str = "ig_power_bound";
    /// `s = 1, Rc < 1`: fitted exponent at least `0.9·Rc`.
    pub const IG_SLOW: &str = "ig_slow_exponent";
    /// `s = 1, Rc = 1`: `k·dist_k / ln k` bounded.
    pub const IG_CRITICAL: &str = "ig_critical_growth";
    /// Constant stepsize: per-cycle distance inequality.
    pub const IG_CONSTANT: &str = "ig_constant_step";
    /// IN, `s = 1, R > 1`: tail max of `k·dist*_k` against `BR(R+1)/(R−1)`.
    pub const IN_STAR: &str = "in_star_bound";
    /// Shared minimizer: fitted exponent at least `min(0.9·Rc, 1.1)`.
    pub const SHARED_MIN: &str = "shared_min_exponent";
    /// `‖e^k‖ ≤ α_k M̃` along the run.
    pub const GRAD_ERROR: &str = "grad_error_bound";
    /// `M ≤ M̃` with the trajectory gradient bound.
    pub const M_LE_M_TILDE: &str = "m_le_m_tilde";
}

/// Growth rate allowed for sequences that should stay bounded.
const GROWTH_TOL: f64 = 0.05;
/// Relative slack for inequalities that hold exactly up to rounding.
const ROUNDING_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerdictConfig {
    pub tail_fraction: f64,
    /// Tolerance factor on the IG limit bounds.
    pub tol_ig: f64,
    /// Tolerance factor on the IN limit bound.
    pub tol_in: f64,
    /// Norm used for the headline fit and tail statistic.
    pub norm: NormKind,
}

impl Default for VerdictConfig {
    fn default() -> Self {
        Self {
            tail_fraction: 0.5,
            tol_ig: 1.1,
            tol_in: 1.2,
            norm: NormKind::Euclid,
        }
    }
}

/// Constants the verdicts were computed with. The `_traj` entries are
/// measured along the run, not closed-form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReportConstants {
    pub c_strong: f64,
    pub l_sum: f64,
    /// `M` for the processing order of the trace.
    pub m: f64,
    pub b: f64,
    pub g_traj: f64,
    pub m_tilde_traj: f64,
    pub m_inf_traj: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RateReport {
    pub method: Method,
    pub r: f64,
    pub s: f64,
    pub cycles: usize,
    pub norm: NormKind,
    pub tail_window: f64,
    pub first_tail_cycle: usize,
    pub fitted_exponent: f64,
    pub fitted_coefficient: f64,
    pub residual: f64,
    pub clipped: bool,
    /// Exponent of the tail statistic `max k^t dist_k`.
    pub t: f64,
    pub tail_limsup: f64,
    pub constants: ReportConstants,
    pub notes: Vec<String>,
    pub verdicts: Vec<Verdict>,
}

impl RateReport {
    /// True when no applicable verdict failed.
    pub fn passed(&self) -> bool {
        !self.verdicts.iter().any(Verdict::failed)
    }

    pub fn verdict(&self, claim: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.claim == claim)
    }

    pub fn failed_claims(&self) -> Vec<&str> {
        self.verdicts
            .iter()
            .filter(|v| v.failed())
            .map(|v| v.claim.as_str())
            .collect()
    }
}

fn is_zero(value: f64, scale: f64) -> bool {
    value <= 1e-10 * scale.max(1.0)
}

/// "dist_k = o(k^{-t})" read as a fitted exponent strictly above `t`.
fn exceeds(claim: &str, fit: &RateFit, t: f64, why: &str) -> Verdict {
    Verdict::check(
        claim,
        t,
        fit.exponent,
        0.0,
        Comparison::Exceeds,
        format!("{why} is zero, so the bound reads dist_k = o(k^-{t}); fitted exponent must exceed {t}"),
    )
}

/// Evaluates every claim for the run's method and schedule. Claims that do
/// not apply are listed as skipped with the reason.
pub fn bound_verdicts(
    problem: &ProblemInstance,
    trace: &RunTrace,
    cfg: &VerdictConfig,
) -> Result<RateReport, AnalysisError> {
    let k = problem.constants()?;
    let m_order = problem.m_constant(trace.order())?;
    let r = trace.schedule().r();
    let s = trace.schedule().s();
    let c = k.c_strong;
    let rc = r * c;
    let frac = cfg.tail_fraction;
    let is_ig = trace.method() == Method::Ig;

    let dist_e = distance_trace(trace, k.x_star.as_slice(), Norm::Euclid)?;
    let dist_s = distance_trace(trace, k.x_star.as_slice(), Norm::Star(&k.h_star))?;
    let dist = match cfg.norm {
        NormKind::Euclid => &dist_e,
        NormKind::Star => &dist_s,
    };
    let fit = fit_rate_exponent(dist, frac)?;
    let t = s;
    let limsup = tail_limsup(dist, t, frac)?;

    let g_traj = trace.max_grad_norm();
    let m_tilde = problem.m_tilde(g_traj)?;
    let m_inf = if is_ig {
        Some(empirical_e(problem, trace)?.into_iter().fold(0.0, f64::max))
    } else {
        None
    };
    let g_star = problem.max_component_gradient_at_min()?;
    let scale = k.l_sum * g_star * problem.len() as f64;
    let m_zero = is_zero(m_order, scale);

    let mut notes = vec![
        format!("limsup proxy: max over the final {frac} of {} cycles", trace.cycles()),
        format!("tail statistic uses t = s = {s}"),
    ];
    if fit.clipped {
        notes.push(format!("zero distances clipped to {:e} before the fit", super::CLIP_FLOOR));
    }
    let mut verdicts = Vec::new();
    let ig_only = "applies to incremental gradient runs";

    // Diminishing stepsize, Rc > 1.
    verdicts.push(if !is_ig {
        Verdict::skipped(claims::IG_INVERSE_K, Comparison::AtMostFactor, cfg.tol_ig, ig_only)
    } else if s != 1.0 || rc <= 1.0 {
        Verdict::skipped(claims::IG_INVERSE_K, Comparison::AtMostFactor, cfg.tol_ig, "needs s = 1 and Rc > 1")
    } else if m_zero {
        exceeds(claims::IG_INVERSE_K, &fit_on(&dist_e, frac)?, 1.0, "M")
    } else {
        Verdict::check(
            claims::IG_INVERSE_K,
            r * r * m_order / (rc - 1.0),
            tail_limsup(&dist_e, 1.0, frac)?,
            cfg.tol_ig,
            Comparison::AtMostFactor,
            "tail max of k dist_k against R^2 M / (Rc - 1)",
        )
    });

    // Power stepsize 0 < s < 1.
    verdicts.push(if !is_ig {
        Verdict::skipped(claims::IG_POWER, Comparison::AtMostFactor, cfg.tol_ig, ig_only)
    } else if !(s > 0.0 && s < 1.0) {
        Verdict::skipped(claims::IG_POWER, Comparison::AtMostFactor, cfg.tol_ig, "needs 0 < s < 1")
    } else if m_zero {
        exceeds(claims::IG_POWER, &fit_on(&dist_e, frac)?, s, "M")
    } else {
        Verdict::check(
            claims::IG_POWER,
            r * m_order / c,
            tail_limsup(&dist_e, s, frac)?,
            cfg.tol_ig,
            Comparison::AtMostFactor,
            "tail max of k^s dist_k against R M / c (t = s)",
        )
    });

    // Rc < 1: slow exponent.
    verdicts.push(if !is_ig {
        Verdict::skipped(claims::IG_SLOW, Comparison::AtLeastFactor, 0.9, ig_only)
    } else if s != 1.0 || rc >= 1.0 {
        Verdict::skipped(claims::IG_SLOW, Comparison::AtLeastFactor, 0.9, "needs s = 1 and Rc < 1")
    } else {
        Verdict::check(
            claims::IG_SLOW,
            rc,
            fit.exponent,
            0.9,
            Comparison::AtLeastFactor,
            "fitted exponent against Rc",
        )
    });

    // Rc = 1: log-corrected rate.
    verdicts.push(if !is_ig || s != 1.0 || (rc - 1.0).abs() > 1e-9 {
        Verdict::skipped(claims::IG_CRITICAL, Comparison::AtMostPlus, GROWTH_TOL, "needs IG with s = 1 and Rc = 1")
    } else {
        let ks: Vec<f64> = (1..=dist_e.len()).map(|k| k as f64).collect();
        let stat: Vec<f64> = ks
            .iter()
            .zip(&dist_e)
            .map(|(&k, &d)| k * d / k.ln().max(std::f64::consts::LN_2))
            .collect();
        Verdict::check(
            claims::IG_CRITICAL,
            0.0,
            growth_exponent(&ks, &stat, frac)?,
            GROWTH_TOL,
            Comparison::AtMostPlus,
            "log-log growth rate of k dist_k / ln k over the tail",
        )
    });

    // Constant stepsize.
    let alpha = r;
    let p_norm = problem.p_sum_norm()?;
    verdicts.push(if !is_ig || s != 0.0 || alpha * p_norm > 1.0 {
        Verdict::skipped(
            claims::IG_CONSTANT,
            Comparison::AtMostFactor,
            1.0 + ROUNDING_SLACK,
            "needs IG with a constant stepsize alpha <= 1/||sum P_i||",
        )
    } else {
        let m_inf = m_inf.unwrap_or(0.0);
        let mut next = dist_e[1..].to_vec();
        let fin = trace
            .final_iterate()
            .iter()
            .zip(k.x_star.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        next.push(fin);
        let contraction = 1.0 - c * alpha;
        let floor = alpha * m_inf / c;
        let mut worst = 0.0_f64;
        let mut violations = 0usize;
        for (idx, &lhs) in next.iter().enumerate() {
            let rhs = contraction.powf((idx + 1) as f64) * dist_e[0] + floor;
            let ratio = if rhs > 0.0 {
                lhs / rhs
            } else if lhs == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            if ratio > 1.0 + ROUNDING_SLACK {
                violations += 1;
            }
            worst = worst.max(ratio);
        }
        Verdict::check(
            claims::IG_CONSTANT,
            1.0,
            worst,
            1.0 + ROUNDING_SLACK,
            Comparison::AtMostFactor,
            format!(
                "max ratio of dist_(k+1) to (1 - c alpha)^k dist_1 + alpha Minf/c with measured Minf = {m_inf:e}; violations {violations} of {}",
                next.len()
            ),
        )
    });

    // Incremental Newton in the star norm.
    let b_zero = is_zero(k.b, scale);
    verdicts.push(if is_ig {
        Verdict::skipped(claims::IN_STAR, Comparison::AtMostFactor, cfg.tol_in, "applies to incremental Newton runs")
    } else if s != 1.0 || r <= 1.0 {
        Verdict::skipped(claims::IN_STAR, Comparison::AtMostFactor, cfg.tol_in, "needs s = 1 and R > 1")
    } else if b_zero {
        exceeds(claims::IN_STAR, &fit_on(&dist_s, frac)?, 1.0, "B")
    } else {
        Verdict::check(
            claims::IN_STAR,
            k.b * r * (r + 1.0) / (r - 1.0),
            tail_limsup(&dist_s, 1.0, frac)?,
            cfg.tol_in,
            Comparison::AtMostFactor,
            "tail max of k dist*_k against B R (R+1) / (R-1)",
        )
    });

    // Shared minimizer.
    let shared = problem.has_shared_minimizer()?;
    let shared_bound = (0.9 * rc).min(1.1);
    verdicts.push(if !is_ig || s != 1.0 || !shared {
        Verdict::skipped(claims::SHARED_MIN, Comparison::AtLeastFactor, 1.0, "needs IG with s = 1 on a shared-minimizer instance")
    } else {
        Verdict::check(
            claims::SHARED_MIN,
            shared_bound,
            fit.exponent,
            1.0,
            Comparison::AtLeastFactor,
            "fitted exponent against min(0.9 Rc, 1.1)",
        )
    });

    // Gradient error along the run.
    verdicts.push(if !is_ig || r * k.l_sum > 1.0 {
        Verdict::skipped(claims::GRAD_ERROR, Comparison::AtMostFactor, 1.0, "needs IG with alpha_1 L <= 1")
    } else {
        let worst = trace
            .grad_error_norms()
            .iter()
            .zip(trace.alphas())
            .map(|(e, a)| e / a)
            .fold(0.0, f64::max);
        Verdict::check(
            claims::GRAD_ERROR,
            m_tilde,
            worst,
            1.0,
            Comparison::AtMostFactor,
            format!("max ||e^k|| / alpha_k against L G m with G = {g_traj:e} measured on the run"),
        )
    });

    verdicts.push(if !is_ig {
        Verdict::skipped(claims::M_LE_M_TILDE, Comparison::AtMostFactor, 1.0, ig_only)
    } else {
        Verdict::check(
            claims::M_LE_M_TILDE,
            m_tilde,
            m_order,
            1.0,
            Comparison::AtMostFactor,
            "M against L G m with the trajectory gradient bound",
        )
    });

    Ok(RateReport {
        method: trace.method(),
        r,
        s,
        cycles: trace.cycles(),
        norm: cfg.norm,
        tail_window: frac,
        first_tail_cycle: fit.first_cycle,
        fitted_exponent: fit.exponent,
        fitted_coefficient: fit.coefficient,
        residual: fit.residual,
        clipped: fit.clipped,
        t,
        tail_limsup: limsup,
        constants: ReportConstants {
            c_strong: c,
            l_sum: k.l_sum,
            m: m_order,
            b: k.b,
            g_traj,
            m_tilde_traj: m_tilde,
            m_inf_traj: m_inf,
        },
        notes,
        verdicts,
    })
}

fn fit_on(dist: &[f64], frac: f64) -> Result<RateFit, AnalysisError> {
    fit_rate_exponent(dist, frac)
}
