use rayon::prelude::*;

use crate::analysis::RateReport;
use crate::solvers::StepsizeSchedule;

use super::run::{build_problem, execute_on};
use super::{ExperimentConfig, ExperimentError};

#[derive(Debug, Clone, PartialEq)]
pub enum RowStatus {
    Pass,
    Fail,
    Diverged { cycle: u64 },
    Error(String),
}

impl RowStatus {
    pub fn label(&self) -> String {
        match self {
            RowStatus::Pass => "pass".into(),
            RowStatus::Fail => "fail".into(),
            RowStatus::Diverged { cycle } => format!("diverged@{cycle}"),
            RowStatus::Error(msg) => format!("error: {msg}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub r: f64,
    pub s: f64,
    pub status: RowStatus,
    pub report: Option<RateReport>,
}

/// Runs `base` for every `(R, s)` in the cross product, concurrently, on one
/// shared problem. Per-run failures become row statuses; rows come back
/// sorted by `(R, s)`.
pub fn sweep(base: &ExperimentConfig, rs: &[f64], ss: &[f64]) -> Result<Vec<SweepRow>, ExperimentError> {
    if rs.is_empty() || ss.is_empty() {
        return Err(ExperimentError::Config("sweep needs at least one R and one s".into()));
    }
    let problem = build_problem(&base.problem)?;
    let mut pairs: Vec<(f64, f64)> = rs.iter().flat_map(|&r| ss.iter().map(move |&s| (r, s))).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pairs.dedup();
    let rows = pairs
        .par_iter()
        .map(|&(r, s)| {
            let schedule = match StepsizeSchedule::new(r, s) {
                Ok(sch) => sch,
                Err(e) => {
                    return SweepRow {
                        r,
                        s,
                        status: RowStatus::Error(e.to_string()),
                        report: None,
                    }
                }
            };
            let cfg = ExperimentConfig {
                schedule,
                ..base.clone()
            };
            match execute_on(&problem, &cfg) {
                Ok(out) => SweepRow {
                    r,
                    s,
                    status: if out.passed() { RowStatus::Pass } else { RowStatus::Fail },
                    report: Some(out.report),
                },
                Err(ExperimentError::Diverged { cycle, .. }) => SweepRow {
                    r,
                    s,
                    status: RowStatus::Diverged { cycle },
                    report: None,
                },
                Err(e) => SweepRow {
                    r,
                    s,
                    status: RowStatus::Error(e.to_string()),
                    report: None,
                },
            }
        })
        .collect();
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{execute, ProblemSpec, X0Spec};
    use crate::problem::ExampleSpec;
    use crate::solvers::Method;

    fn base() -> ExperimentConfig {
        ExperimentConfig::new(
            ProblemSpec::Example(ExampleSpec::LowerPair { l: 1.0 }),
            Method::Ig,
            StepsizeSchedule::new(1.0, 1.0).unwrap(),
            X0Spec::Explicit(vec![0.0]),
            5000,
        )
    }

    #[test]
    fn rows_sorted_and_failures_kept() {
        let rows = sweep(&base(), &[10.0, 1.0, -1.0], &[1.0, 0.5]).unwrap();
        let keys: Vec<(f64, f64)> = rows.iter().map(|r| (r.r, r.s)).collect();
        assert_eq!(keys, vec![(-1.0, 0.5), (-1.0, 1.0), (1.0, 0.5), (1.0, 1.0), (10.0, 0.5), (10.0, 1.0)]);
        assert!(matches!(rows[0].status, RowStatus::Error(_)));
        assert!(rows[2..].iter().all(|r| r.report.is_some()));
    }

    #[test]
    fn single_pair_matches_run() {
        let rows = sweep(&base(), &[10.0], &[1.0]).unwrap();
        let mut cfg = base();
        cfg.schedule = StepsizeSchedule::new(10.0, 1.0).unwrap();
        let direct = execute(&cfg).unwrap().report;
        let swept = rows[0].report.as_ref().unwrap();
        assert_eq!(serde_json::to_string(swept).unwrap(), serde_json::to_string(&direct).unwrap());
    }

    #[test]
    fn empty_lists_rejected() {
        assert!(sweep(&base(), &[], &[1.0]).is_err());
    }
}
