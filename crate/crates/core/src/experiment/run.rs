use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analysis::{bound_verdicts, RateReport};
use crate::problem::{make_example, parse_instance, sampling, ProblemInstance};
use crate::solvers::{identity_order, rotated_order, run_ig, run_in, Method, RunTrace};

use super::output::{report_jsonl, write_trace_csv};
use super::{ExperimentConfig, ExperimentError, OrderSpec, ProblemSpec, X0Spec};

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub problem: ProblemInstance,
    pub trace: RunTrace,
    pub report: RateReport,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.report.passed()
    }
}

pub fn build_problem(spec: &ProblemSpec) -> Result<ProblemInstance, ExperimentError> {
    match spec {
        ProblemSpec::Example(ex) => Ok(make_example(ex)?),
        ProblemSpec::File(path) => {
            let text = fs::read_to_string(path).map_err(|e| ExperimentError::io(path, e))?;
            Ok(parse_instance(&text)?)
        }
    }
}

pub fn build_x0(spec: &X0Spec, dim: usize) -> Result<DVector<f64>, ExperimentError> {
    match spec {
        X0Spec::Ones => Ok(DVector::from_element(dim, 1.0)),
        X0Spec::Random { seed } => Ok(sampling::gaussian_vector(&mut ChaCha8Rng::seed_from_u64(*seed), dim)),
        X0Spec::Explicit(v) if v.len() == dim => Ok(DVector::from_column_slice(v)),
        X0Spec::Explicit(v) => Err(ExperimentError::Config(format!(
            "x0.values has {} entries, the problem has dimension {dim}",
            v.len()
        ))),
    }
}

pub fn build_order(spec: &OrderSpec, m: usize) -> Result<Vec<usize>, ExperimentError> {
    match spec {
        OrderSpec::Identity => Ok(identity_order(m)),
        OrderSpec::Rotate(j) if *j < m => Ok(rotated_order(m, *j)),
        OrderSpec::Rotate(j) => Err(ExperimentError::Config(format!(
            "order.shift = {j} but there are only {m} components"
        ))),
        OrderSpec::Explicit(p) => {
            crate::problem::check_permutation(p, m).map_err(|e| ExperimentError::Config(e.to_string()))?;
            Ok(p.clone())
        }
    }
}

/// Runs the configured solver and analysis on an already built problem,
/// without touching the filesystem.
pub fn execute_on(problem: &ProblemInstance, cfg: &ExperimentConfig) -> Result<RunOutcome, ExperimentError> {
    if cfg.cycles == 0 {
        return Err(ExperimentError::Config("cycles must be ≥ 1".into()));
    }
    let x0 = build_x0(&cfg.x0, problem.dim())?;
    let order = build_order(&cfg.order, problem.len())?;
    let trace = match cfg.method {
        Method::Ig => run_ig(problem, &cfg.schedule, &x0, cfg.cycles, &order, false)?,
        Method::In => {
            if order != identity_order(problem.len()) {
                return Err(ExperimentError::Config("incremental Newton runs use the identity order".into()));
            }
            run_in(problem, &cfg.schedule, &x0, cfg.cycles)?
        }
    };
    let report = bound_verdicts(problem, &trace, &cfg.analysis)?;
    Ok(RunOutcome {
        problem: problem.clone(),
        trace,
        report,
    })
}

pub fn execute(cfg: &ExperimentConfig) -> Result<RunOutcome, ExperimentError> {
    let problem = build_problem(&cfg.problem)?;
    execute_on(&problem, cfg)
}

pub(crate) fn write_trace_file(path: &Path, problem: &ProblemInstance, trace: &RunTrace) -> Result<(), ExperimentError> {
    let file = File::create(path).map_err(|e| ExperimentError::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_trace_csv(&mut w, problem, trace)
        .and_then(|_| w.flush())
        .map_err(|e| ExperimentError::io(path, e))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<(), ExperimentError> {
    fs::write(path, text).map_err(|e| ExperimentError::io(path, e))
}

/// [`execute`] plus the configured artifacts. On divergence the partial
/// trace is still written before the error is returned.
pub fn run_config(cfg: &ExperimentConfig) -> Result<RunOutcome, ExperimentError> {
    let problem = build_problem(&cfg.problem)?;
    match execute_on(&problem, cfg) {
        Ok(out) => {
            if let Some(p) = &cfg.trace_path {
                write_trace_file(p, &problem, &out.trace)?;
            }
            if let Some(p) = &cfg.report_path {
                write_text(p, &report_jsonl(&out.report.verdicts))?;
            }
            Ok(out)
        }
        Err(ExperimentError::Diverged { cycle, partial }) => {
            if let (Some(p), Some(tr)) = (&cfg.trace_path, &partial) {
                write_trace_file(p, &problem, tr)?;
            }
            Err(ExperimentError::Diverged { cycle, partial })
        }
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::claims;
    use crate::problem::ExampleSpec;
    use crate::solvers::StepsizeSchedule;

    fn lower_pair_cfg(r: f64, s: f64, cycles: u64) -> ExperimentConfig {
        ExperimentConfig::new(
            ProblemSpec::Example(ExampleSpec::LowerPair { l: 1.0 }),
            Method::Ig,
            StepsizeSchedule::new(r, s).unwrap(),
            X0Spec::Explicit(vec![0.0]),
            cycles,
        )
    }

    #[test]
    fn inverse_k_run_passes() {
        let out = execute(&lower_pair_cfg(10.0, 1.0, 2000)).unwrap();
        assert_eq!(out.report.verdict(claims::IG_INVERSE_K).unwrap().pass, Some(true));
        assert!(out.passed());
    }

    #[test]
    fn divergence_writes_partial_trace() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = lower_pair_cfg(3.0, 0.0, 100_000);
        cfg.trace_path = Some(dir.path().join("t.csv"));
        let err = run_config(&cfg).unwrap_err();
        assert_eq!(err.exit_code(), super::super::exit::DIVERGENCE);
        let text = fs::read_to_string(dir.path().join("t.csv")).unwrap();
        assert!(text.lines().count() > 2);
    }

    #[test]
    fn newton_rejects_custom_order() {
        let mut cfg = lower_pair_cfg(2.0, 1.0, 100);
        cfg.method = Method::In;
        cfg.order = OrderSpec::Rotate(1);
        assert!(matches!(execute(&cfg), Err(ExperimentError::Config(_))));
    }

    #[test]
    fn x0_and_order_builders() {
        assert!(build_x0(&X0Spec::Explicit(vec![1.0, 2.0]), 3).is_err());
        let a = build_x0(&X0Spec::Random { seed: 4 }, 3).unwrap();
        assert_eq!(a, build_x0(&X0Spec::Random { seed: 4 }, 3).unwrap());
        assert_eq!(build_order(&OrderSpec::Rotate(2), 3).unwrap(), vec![2, 0, 1]);
        assert!(build_order(&OrderSpec::Rotate(3), 3).is_err());
        assert!(build_order(&OrderSpec::Explicit(vec![0, 0, 1]), 3).is_err());
    }
}
