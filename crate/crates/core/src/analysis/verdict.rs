use serde::Serialize;

/// How a measured value is compared with its theoretical bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `measured ≤ tol · bound`
    AtMostFactor,
    /// `measured ≥ tol · bound`
    AtLeastFactor,
    /// `|measured − bound| ≤ tol`
    WithinAbs,
    /// `measured ≤ bound + tol`
    AtMostPlus,
    /// `measured > bound`
    Exceeds,
}

impl Comparison {
    pub fn holds(self, bound: f64, measured: f64, tol: f64) -> bool {
        if !measured.is_finite() || !bound.is_finite() {
            return false;
        }
        match self {
            Comparison::AtMostFactor => measured <= tol * bound,
            Comparison::AtLeastFactor => measured >= tol * bound,
            Comparison::WithinAbs => (measured - bound).abs() <= tol,
            Comparison::AtMostPlus => measured <= bound + tol,
            Comparison::Exceeds => measured > bound,
        }
    }
}

/// One checked (or skipped) claim. `pass` is `None` for claims that do not
/// apply to the run; the reason is in `note`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub claim: String,
    pub bound: Option<f64>,
    pub measured: Option<f64>,
    pub tol: f64,
    pub comparison: Comparison,
    pub pass: Option<bool>,
    pub note: String,
}

impl Verdict {
    pub fn check(
        claim: impl Into<String>,
        bound: f64,
        measured: f64,
        tol: f64,
        comparison: Comparison,
        note: impl Into<String>,
    ) -> Self {
        Self {
            claim: claim.into(),
            bound: Some(bound),
            measured: Some(measured),
            tol,
            comparison,
            pass: Some(comparison.holds(bound, measured, tol)),
            note: note.into(),
        }
    }

    pub fn skipped(claim: impl Into<String>, comparison: Comparison, tol: f64, note: impl Into<String>) -> Self {
        Self {
            claim: claim.into(),
            bound: None,
            measured: None,
            tol,
            comparison,
            pass: None,
            note: note.into(),
        }
    }

    pub fn is_skipped(&self) -> bool {
        self.pass.is_none()
    }

    pub fn failed(&self) -> bool {
        self.pass == Some(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comparisons() {
        assert!(Comparison::AtMostFactor.holds(5.0, 5.4, 1.1));
        assert!(!Comparison::AtMostFactor.holds(5.0, 5.6, 1.1));
        assert!(Comparison::AtLeastFactor.holds(0.2, 0.19, 0.9));
        assert!(Comparison::WithinAbs.holds(0.2, 0.21, 0.02));
        assert!(!Comparison::WithinAbs.holds(0.2, 0.23, 0.02));
        assert!(Comparison::AtMostPlus.holds(0.0, 0.04, 0.05));
        assert!(Comparison::Exceeds.holds(1.0, 1.2, 0.0));
        assert!(!Comparison::Exceeds.holds(1.0, 1.0, 0.0));
        assert!(!Comparison::AtMostFactor.holds(1.0, f64::NAN, 1.1));
    }

    #[test]
    fn skipped_serializes_nulls() {
        let v = Verdict::skipped("x", Comparison::AtMostFactor, 1.1, "n/a");
        let s = serde_json::to_string(&v).unwrap();
        assert!(s.contains("\"pass\":null"));
        assert!(s.contains("\"bound\":null"));
        assert!(v.is_skipped() && !v.failed());
    }
}
