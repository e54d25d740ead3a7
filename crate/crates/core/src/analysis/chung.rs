use serde::Serialize;

use super::fit::{growth_exponent, tail_window};
use super::{AnalysisError, Comparison, Verdict};

/// Parameters of `u_{k+1} = (1 − a/k^s) u_k + d/k^{s+t}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChungParams {
    pub a: f64,
    pub d: f64,
    pub s: f64,
    pub t: f64,
    /// First index the recursion may start from.
    pub k0: u64,
    /// Value at the first simulated index.
    pub u0: f64,
    /// Last index `K`.
    pub horizon: u64,
    /// Relative slack on the limit bounds, or the allowed growth exponent
    /// for the bounded branches.
    pub tol: f64,
    pub tail_fraction: f64,
}

impl ChungParams {
    pub fn new(a: f64, d: f64, s: f64, t: f64, horizon: u64) -> Self {
        Self {
            a,
            d,
            s,
            t,
            k0: 1,
            u0: 1.0,
            horizon,
            tol: 0.05,
            tail_fraction: 0.5,
        }
    }

    /// First index where `1 − a/k^s ≥ 0`, so the simulated sequence stays
    /// non-negative.
    pub fn start_index(&self) -> u64 {
        let threshold = self.a.powf(1.0 / self.s).ceil();
        self.k0.max(threshold as u64).max(1)
    }

    fn validate(&self) -> Result<(), AnalysisError> {
        let bad = |m: &str| Err(AnalysisError::BadParams(m.into()));
        if !(self.a > 0.0 && self.a.is_finite()) {
            return bad("a must be positive");
        }
        if !(self.d >= 0.0 && self.d.is_finite()) {
            return bad("d must be non-negative");
        }
        if !(self.s > 0.0 && self.s <= 1.0) {
            return bad("s must lie in (0, 1]");
        }
        if !(self.t > 0.0 && self.t.is_finite()) {
            return bad("t must be positive");
        }
        if !(self.u0 >= 0.0 && self.u0.is_finite()) {
            return bad("initial value must be non-negative");
        }
        if !(self.tol >= 0.0 && self.tol.is_finite()) {
            return bad("tolerance must be non-negative");
        }
        if self.k0 == 0 {
            return bad("k0 must be at least 1");
        }
        if self.horizon <= self.start_index() {
            return bad("horizon must exceed the start index");
        }
        Ok(())
    }
}

/// Which asymptotic statement of the recursion applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChungBranch {
    /// `s = 1, a > t`: `limsup k^t u_k ≤ d/(a − t)`.
    Above,
    /// `s = 1, a = t`: `k^a u_k / ln k` bounded.
    Critical,
    /// `s = 1, a < t`: `k^a u_k` bounded.
    Below,
    /// `s < 1`: `limsup k^t u_k ≤ d/a`.
    Sublinear,
}

impl ChungBranch {
    pub fn of(p: &ChungParams) -> Self {
        if p.s < 1.0 {
            ChungBranch::Sublinear
        } else if (p.a - p.t).abs() <= 1e-12 * p.a.max(p.t) {
            ChungBranch::Critical
        } else if p.a > p.t {
            ChungBranch::Above
        } else {
            ChungBranch::Below
        }
    }

    pub fn claim_id(self) -> &'static str {
        match self {
            ChungBranch::Above => "chung_above",
            ChungBranch::Critical => "chung_critical",
            ChungBranch::Below => "chung_below",
            ChungBranch::Sublinear => "chung_sublinear",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ChungOutcome {
    pub branch: ChungBranch,
    /// Index of `u[0]`.
    pub start: u64,
    /// `u_k` for `k = start..=horizon`.
    pub u: Vec<f64>,
    pub verdict: Verdict,
}

impl ChungOutcome {
    pub fn k_at(&self, i: usize) -> f64 {
        (self.start + i as u64) as f64
    }
}

/// Runs the recursion with equality and checks the branch conclusion on the
/// tail window. Limit bounds use the tail max of `k^t u_k` against
/// `(1 + tol)` times the limit; boundedness is read as a log-log growth rate
/// of the normalized sequence of at most `tol`.
pub fn chung_simulate(p: &ChungParams) -> Result<ChungOutcome, AnalysisError> {
    p.validate()?;
    let start = p.start_index();
    let len = (p.horizon - start + 1) as usize;
    let mut u = Vec::with_capacity(len);
    let mut cur = p.u0;
    u.push(cur);
    for k in start..p.horizon {
        let kf = k as f64;
        let ks = if p.s == 1.0 { kf } else { kf.powf(p.s) };
        cur = (1.0 - p.a / ks) * cur + p.d / kf.powf(p.s + p.t);
        u.push(cur);
    }
    let ks: Vec<f64> = (0..len).map(|i| (start + i as u64) as f64).collect();
    let window = tail_window(len, p.tail_fraction)?;
    let branch = ChungBranch::of(p);
    let scaled_max = |t: f64| {
        window
            .clone()
            .map(|i| ks[i].powf(t) * u[i])
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let verdict = match branch {
        ChungBranch::Above | ChungBranch::Sublinear => {
            let limit = match branch {
                ChungBranch::Above => p.d / (p.a - p.t),
                _ => p.d / p.a,
            };
            Verdict::check(
                branch.claim_id(),
                limit,
                scaled_max(p.t),
                1.0 + p.tol,
                Comparison::AtMostFactor,
                format!("tail max of k^t u_k over k >= {}", ks[window.start]),
            )
        }
        ChungBranch::Critical | ChungBranch::Below => {
            let stat: Vec<f64> = ks
                .iter()
                .zip(&u)
                .map(|(&k, &v)| {
                    let base = k.powf(p.a) * v;
                    if branch == ChungBranch::Critical {
                        base / k.ln().max(f64::MIN_POSITIVE)
                    } else {
                        base
                    }
                })
                .collect();
            let growth = growth_exponent(&ks, &stat, p.tail_fraction)?;
            let what = if branch == ChungBranch::Critical { "k^a u_k / ln k" } else { "k^a u_k" };
            Verdict::check(
                branch.claim_id(),
                0.0,
                growth,
                p.tol,
                Comparison::AtMostPlus,
                format!("log-log growth rate of {what} over the tail"),
            )
        }
    };
    Ok(ChungOutcome {
        branch,
        start,
        u,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn above_branch_limit() {
        let out = chung_simulate(&ChungParams::new(2.0, 1.0, 1.0, 1.0, 1_000_000)).unwrap();
        assert_eq!(out.branch, ChungBranch::Above);
        assert_eq!(out.verdict.pass, Some(true), "{:?}", out.verdict);
        assert!(out.verdict.measured.unwrap() <= 1.05);
    }

    #[test]
    fn sublinear_branch_limit() {
        let out = chung_simulate(&ChungParams::new(0.5, 1.0, 0.5, 0.5, 1_000_000)).unwrap();
        assert_eq!(out.branch, ChungBranch::Sublinear);
        assert!(out.verdict.measured.unwrap() <= 2.1, "{:?}", out.verdict);
    }

    #[test]
    fn zero_forcing_decays_monotonically() {
        for s in [0.3, 0.5, 1.0] {
            let out = chung_simulate(&ChungParams::new(1.0, 0.0, s, 1.0, 10_000)).unwrap();
            assert!(out.u.windows(2).all(|w| w[1] <= w[0]));
            assert!(*out.u.last().unwrap() < 1e-3);
        }
    }

    #[test]
    fn start_index_keeps_factor_non_negative() {
        let p = ChungParams::new(4.0, 1.0, 0.5, 1.0, 100);
        assert_eq!(p.start_index(), 16);
        let out = chung_simulate(&p).unwrap();
        assert!(out.u.iter().all(|&v| v >= 0.0));
        assert_eq!(out.k_at(0), 16.0);
    }

    #[test]
    fn branch_selection() {
        let b = |a, s, t| ChungBranch::of(&ChungParams::new(a, 1.0, s, t, 100));
        assert_eq!(b(1.0, 1.0, 1.0), ChungBranch::Critical);
        assert_eq!(b(0.5, 1.0, 1.0), ChungBranch::Below);
        assert_eq!(b(2.0, 1.0, 1.0), ChungBranch::Above);
        assert_eq!(b(2.0, 0.5, 1.0), ChungBranch::Sublinear);
    }

    #[test]
    fn bad_params() {
        let mut p = ChungParams::new(1.0, 1.0, 1.0, 1.0, 100);
        p.s = 1.5;
        assert!(chung_simulate(&p).is_err());
        let p = ChungParams::new(-1.0, 1.0, 1.0, 1.0, 100);
        assert!(chung_simulate(&p).is_err());
        let p = ChungParams::new(1.0, 1.0, 1.0, 1.0, 1);
        assert!(chung_simulate(&p).is_err());
    }

    #[test]
    fn verdicts_pass_on_grid_around_branch_boundaries() {
        for s in [0.5, 1.0] {
            for a in [0.5, 1.0, 2.0] {
                for t in [0.5, 1.0, 2.0] {
                    let out = chung_simulate(&ChungParams::new(a, 1.0, s, t, 1_000_000)).unwrap();
                    assert_eq!(out.verdict.pass, Some(true), "a={a} t={t} s={s}: {:?}", out.verdict);
                }
            }
        }
    }
}
