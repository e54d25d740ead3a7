//! Flat `section.key = value` experiment files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use crate::analysis::{NormKind, VerdictConfig};
use crate::problem::ExampleSpec;
use crate::solvers::{Method, StepsizeSchedule};

use super::ExperimentError;

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSpec {
    Example(ExampleSpec),
    /// Instance file in the `component i` text format.
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum X0Spec {
    Explicit(Vec<f64>),
    Ones,
    /// Standard Gaussian entries from a seeded generator.
    Random { seed: u64 },
}

/// Processing order; permutations are 0-based in memory and 1-based in files.
#[derive(Debug, Clone, PartialEq)]
pub enum OrderSpec {
    Identity,
    Rotate(usize),
    Explicit(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub method: Method,
    pub schedule: StepsizeSchedule,
    pub x0: X0Spec,
    pub cycles: u64,
    pub order: OrderSpec,
    pub trace_path: Option<PathBuf>,
    pub report_path: Option<PathBuf>,
    pub analysis: VerdictConfig,
}

impl ExperimentConfig {
    pub fn new(problem: ProblemSpec, method: Method, schedule: StepsizeSchedule, x0: X0Spec, cycles: u64) -> Self {
        Self {
            problem,
            method,
            schedule,
            x0,
            cycles,
            order: OrderSpec::Identity,
            trace_path: None,
            report_path: None,
            analysis: VerdictConfig::default(),
        }
    }

    /// Writes the config back to text; `parse` of the result gives an equal
    /// config.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        match &self.problem {
            ProblemSpec::Example(ExampleSpec::SlowConv) => put("problem.kind", "slow_conv".into()),
            ProblemSpec::Example(ExampleSpec::LowerPair { l }) => {
                put("problem.kind", "lower_pair".into());
                put("problem.L", format!("{l:?}"));
            }
            ProblemSpec::Example(ExampleSpec::Octet) => put("problem.kind", "octet".into()),
            ProblemSpec::Example(ExampleSpec::SharedMin { n, m, seed }) => {
                put("problem.kind", "shared_min".into());
                put("problem.n", n.to_string());
                put("problem.m", m.to_string());
                put("problem.seed", seed.to_string());
            }
            ProblemSpec::Example(ExampleSpec::Random { n, m, c, l, seed }) => {
                put("problem.kind", "random".into());
                put("problem.n", n.to_string());
                put("problem.m", m.to_string());
                put("problem.c", format!("{c:?}"));
                put("problem.L", format!("{l:?}"));
                put("problem.seed", seed.to_string());
            }
            ProblemSpec::File(p) => {
                put("problem.kind", "file".into());
                put("problem.path", p.display().to_string());
            }
        }
        put("solver.method", self.method.as_str().into());
        put("schedule.R", format!("{:?}", self.schedule.r()));
        put("schedule.s", format!("{:?}", self.schedule.s()));
        match &self.x0 {
            X0Spec::Explicit(v) => {
                put("x0.kind", "explicit".into());
                put("x0.values", join(v.iter().map(|x| format!("{x:?}"))));
            }
            X0Spec::Ones => put("x0.kind", "ones".into()),
            X0Spec::Random { seed } => {
                put("x0.kind", "random".into());
                put("x0.seed", seed.to_string());
            }
        }
        put("run.cycles", self.cycles.to_string());
        match &self.order {
            OrderSpec::Identity => put("order.kind", "identity".into()),
            OrderSpec::Rotate(j) => {
                put("order.kind", "rotate".into());
                put("order.shift", j.to_string());
            }
            OrderSpec::Explicit(p) => {
                put("order.kind", "explicit".into());
                put("order.perm", join(p.iter().map(|i| (i + 1).to_string())));
            }
        }
        if let Some(p) = &self.trace_path {
            put("output.trace", p.display().to_string());
        }
        if let Some(p) = &self.report_path {
            put("output.report", p.display().to_string());
        }
        put("analysis.tail_fraction", format!("{:?}", self.analysis.tail_fraction));
        put("analysis.tol_ig", format!("{:?}", self.analysis.tol_ig));
        put("analysis.tol_in", format!("{:?}", self.analysis.tol_in));
        put("analysis.norm", self.analysis.norm.as_str().into());
        out
    }

    pub fn parse(text: &str) -> Result<Self, ExperimentError> {
        let mut kv = Entries::read(text)?;
        let kind = kv.required("problem.kind")?;
        let problem = match kind.as_str() {
            "slow_conv" => ProblemSpec::Example(ExampleSpec::SlowConv),
            "lower_pair" => ProblemSpec::Example(ExampleSpec::LowerPair {
                l: kv.parsed_or("problem.L", 1.0)?,
            }),
            "octet" => ProblemSpec::Example(ExampleSpec::Octet),
            "shared_min" => ProblemSpec::Example(ExampleSpec::SharedMin {
                n: kv.parsed("problem.n")?,
                m: kv.parsed("problem.m")?,
                seed: kv.parsed("problem.seed")?,
            }),
            "random" => ProblemSpec::Example(ExampleSpec::Random {
                n: kv.parsed("problem.n")?,
                m: kv.parsed("problem.m")?,
                c: kv.parsed("problem.c")?,
                l: kv.parsed("problem.L")?,
                seed: kv.parsed("problem.seed")?,
            }),
            "file" => ProblemSpec::File(PathBuf::from(kv.required("problem.path")?)),
            other => return Err(config_err(format!("unknown problem.kind '{other}'"))),
        };
        let method = match kv.optional("solver.method").as_deref() {
            None | Some("ig") => Method::Ig,
            Some("in") => Method::In,
            Some(other) => return Err(config_err(format!("unknown solver.method '{other}'"))),
        };
        let r: f64 = kv.parsed("schedule.R")?;
        let s: f64 = kv.parsed("schedule.s")?;
        let schedule = StepsizeSchedule::new(r, s).map_err(|e| config_err(e.to_string()))?;
        let x0 = match kv.optional("x0.kind").as_deref() {
            None | Some("ones") => X0Spec::Ones,
            Some("explicit") => X0Spec::Explicit(parse_list(&kv.required("x0.values")?, "x0.values")?),
            Some("random") => X0Spec::Random {
                seed: kv.parsed("x0.seed")?,
            },
            Some(other) => return Err(config_err(format!("unknown x0.kind '{other}'"))),
        };
        let cycles: u64 = kv.parsed("run.cycles")?;
        if cycles == 0 {
            return Err(config_err("cycles must be ≥ 1"));
        }
        let order = match kv.optional("order.kind").as_deref() {
            None | Some("identity") => OrderSpec::Identity,
            Some("rotate") => OrderSpec::Rotate(kv.parsed("order.shift")?),
            Some("explicit") => {
                let one_based: Vec<usize> = parse_list(&kv.required("order.perm")?, "order.perm")?;
                if one_based.contains(&0) {
                    return Err(config_err("order.perm is 1-based"));
                }
                OrderSpec::Explicit(one_based.into_iter().map(|i| i - 1).collect())
            }
            Some(other) => return Err(config_err(format!("unknown order.kind '{other}'"))),
        };
        let trace_path = kv.optional("output.trace").map(PathBuf::from);
        let report_path = kv.optional("output.report").map(PathBuf::from);
        let defaults = VerdictConfig::default();
        let analysis = VerdictConfig {
            tail_fraction: kv.parsed_or("analysis.tail_fraction", defaults.tail_fraction)?,
            tol_ig: kv.parsed_or("analysis.tol_ig", defaults.tol_ig)?,
            tol_in: kv.parsed_or("analysis.tol_in", defaults.tol_in)?,
            norm: match kv.optional("analysis.norm").as_deref() {
                None | Some("euclid") => NormKind::Euclid,
                Some("star") => NormKind::Star,
                Some(other) => return Err(config_err(format!("unknown analysis.norm '{other}'"))),
            },
        };
        if !(analysis.tail_fraction > 0.0 && analysis.tail_fraction <= 1.0) {
            return Err(config_err("analysis.tail_fraction must lie in (0, 1]"));
        }
        if !(analysis.tol_ig > 0.0 && analysis.tol_in > 0.0) {
            return Err(config_err("tolerance factors must be positive"));
        }
        kv.finish()?;
        Ok(Self {
            problem,
            method,
            schedule,
            x0,
            cycles,
            order,
            trace_path,
            report_path,
            analysis,
        })
    }
}

fn config_err(msg: impl Into<String>) -> ExperimentError {
    ExperimentError::Config(msg.into())
}

fn join(items: impl Iterator<Item = String>) -> String {
    items.collect::<Vec<_>>().join(", ")
}

fn parse_list<T: FromStr>(text: &str, key: &str) -> Result<Vec<T>, ExperimentError> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| config_err(format!("{key}: cannot parse '{}'", t.trim())))
        })
        .collect()
}

/// Key/value pairs that must all be consumed.
struct Entries {
    map: BTreeMap<String, (usize, String)>,
}

const KNOWN_KEYS: &[&str] = &[
    "problem.kind",
    "problem.L",
    "problem.c",
    "problem.n",
    "problem.m",
    "problem.seed",
    "problem.path",
    "solver.method",
    "schedule.R",
    "schedule.s",
    "x0.kind",
    "x0.values",
    "x0.seed",
    "run.cycles",
    "order.kind",
    "order.shift",
    "order.perm",
    "output.trace",
    "output.report",
    "analysis.tail_fraction",
    "analysis.tol_ig",
    "analysis.tol_in",
    "analysis.norm",
];

impl Entries {
    fn read(text: &str) -> Result<Self, ExperimentError> {
        let mut map = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_err(format!("line {line_no}: expected 'key = value'")))?;
            let key = key.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(config_err(format!("line {line_no}: unknown key '{key}'")));
            }
            if map.insert(key.to_string(), (line_no, value.trim().to_string())).is_some() {
                return Err(config_err(format!("line {line_no}: duplicate key '{key}'")));
            }
        }
        Ok(Self { map })
    }

    fn optional(&mut self, key: &str) -> Option<String> {
        self.map.remove(key).map(|(_, v)| v)
    }

    fn required(&mut self, key: &str) -> Result<String, ExperimentError> {
        self.optional(key).ok_or_else(|| config_err(format!("missing key '{key}'")))
    }

    fn parsed<T: FromStr>(&mut self, key: &str) -> Result<T, ExperimentError> {
        let v = self.required(key)?;
        v.parse().map_err(|_| config_err(format!("{key}: cannot parse '{v}'")))
    }

    fn parsed_or<T: FromStr>(&mut self, key: &str, default: T) -> Result<T, ExperimentError> {
        match self.optional(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| config_err(format!("{key}: cannot parse '{v}'"))),
        }
    }

    /// Keys left over are not meaningful for the chosen kinds.
    fn finish(self) -> Result<(), ExperimentError> {
        match self.map.iter().next() {
            None => Ok(()),
            Some((k, (line, _))) => Err(config_err(format!("line {line}: key '{k}' does not apply to this configuration"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# slow case
problem.kind = slow_conv
solver.method = ig
schedule.R = 1
schedule.s = 1
x0.kind = explicit
x0.values = 1.0
run.cycles = 1000
";

    #[test]
    fn parses_sample_and_round_trips() {
        let cfg = ExperimentConfig::parse(SAMPLE).unwrap();
        assert_eq!(cfg.problem, ProblemSpec::Example(ExampleSpec::SlowConv));
        assert_eq!(cfg.x0, X0Spec::Explicit(vec![1.0]));
        assert_eq!(cfg.order, OrderSpec::Identity);
        assert_eq!(ExperimentConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn explicit_order_is_one_based() {
        let text = "problem.kind = octet\nschedule.R = 1\nschedule.s = 0.75\nrun.cycles = 10\norder.kind = explicit\norder.perm = 2,3,4,5,6,7,8,1\n";
        let cfg = ExperimentConfig::parse(text).unwrap();
        assert_eq!(cfg.order, OrderSpec::Explicit(vec![1, 2, 3, 4, 5, 6, 7, 0]));
        assert!(cfg.to_text().contains("order.perm = 2, 3, 4, 5, 6, 7, 8, 1"));
        assert!(ExperimentConfig::parse(&text.replace("2,3", "0,3")).is_err());
    }

    #[test]
    fn rejects_bad_files() {
        let zero = SAMPLE.replace("run.cycles = 1000", "run.cycles = 0");
        let err = ExperimentConfig::parse(&zero).unwrap_err();
        assert!(err.to_string().contains("cycles must be ≥ 1"));
        assert!(ExperimentConfig::parse(&format!("{SAMPLE}bogus.key = 1\n")).is_err());
        assert!(ExperimentConfig::parse(&format!("{SAMPLE}run.cycles = 5\n")).is_err());
        assert!(ExperimentConfig::parse(&format!("{SAMPLE}problem.L = 2\n")).is_err());
        assert!(ExperimentConfig::parse(&SAMPLE.replace("schedule.s = 1", "schedule.s = 2")).is_err());
        assert!(ExperimentConfig::parse("problem.kind\n").is_err());
    }
}
