use serde::Serialize;

use super::SolverError;

/// `α_k = R / k^s` with `R > 0` and `s ∈ [0, 1]`; `s = 0` is a constant
/// stepsize.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepsizeSchedule {
    r: f64,
    s: f64,
}

impl StepsizeSchedule {
    pub fn new(r: f64, s: f64) -> Result<Self, SolverError> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(SolverError::BadSchedule(format!("R must be positive, got {r}")));
        }
        if !(0.0..=1.0).contains(&s) {
            return Err(SolverError::BadSchedule(format!("s must lie in [0, 1], got {s}")));
        }
        Ok(Self { r, s })
    }

    pub fn constant(alpha: f64) -> Result<Self, SolverError> {
        Self::new(alpha, 0.0)
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn is_constant(&self) -> bool {
        self.s == 0.0
    }

    /// Stepsize of cycle `k ≥ 1`.
    pub fn alpha(&self, k: u64) -> f64 {
        debug_assert!(k >= 1);
        let kf = k as f64;
        if self.s == 0.0 {
            self.r
        } else if self.s == 1.0 {
            self.r / kf
        } else {
            self.r / kf.powf(self.s)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values() {
        let c = StepsizeSchedule::new(0.3, 0.0).unwrap();
        assert!((1..100).all(|k| c.alpha(k) == 0.3));
        let h = StepsizeSchedule::new(2.0, 1.0).unwrap();
        assert_eq!(h.alpha(4), 0.5);
        let r = StepsizeSchedule::new(1.0, 0.5).unwrap();
        assert_eq!(r.alpha(16), 0.25);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(StepsizeSchedule::new(0.0, 0.5).is_err());
        assert!(StepsizeSchedule::new(1.0, 1.5).is_err());
        assert!(StepsizeSchedule::new(1.0, -0.1).is_err());
        assert!(StepsizeSchedule::new(f64::NAN, 0.5).is_err());
    }
}
