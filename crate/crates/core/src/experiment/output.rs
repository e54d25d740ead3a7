use std::io::{self, Write};

use crate::analysis::{RateReport, Verdict};
use crate::problem::ProblemInstance;
use crate::solvers::RunTrace;

use super::{RowStatus, SweepRow};

pub const TRACE_HEADER: &str = "cycle,alpha,dist_euclid,dist_star,grad_error_norm,k_dist,k_s_dist";
pub const SWEEP_HEADER: &str =
    "R,s,status,fitted_exponent,fitted_coefficient,residual,tail_limsup,verdicts_pass,failed_claims";

/// Streams the per-cycle trace table. Distances use `x*` when the problem
/// has one; `dist_star` is left empty unless the Hessian at the minimizer is
/// known in closed form.
pub fn write_trace_csv<W: Write>(out: &mut W, problem: &ProblemInstance, trace: &RunTrace) -> io::Result<()> {
    let x_star = problem.minimizer().ok();
    let h_star = x_star.as_ref().and_then(|_| problem.p_sum().ok());
    let s = trace.schedule().s();
    let mut z = vec![0.0; trace.dim()];
    writeln!(out, "{TRACE_HEADER}")?;
    for idx in 0..trace.cycles() {
        let k = (idx + 1) as f64;
        write!(out, "{},{:?},", idx + 1, trace.alphas()[idx])?;
        match &x_star {
            Some(xs) => {
                for ((zi, x), s) in z.iter_mut().zip(trace.outer(idx)).zip(xs.iter()) {
                    *zi = x - s;
                }
                let de = z.iter().map(|v| v * v).sum::<f64>().sqrt();
                write!(out, "{de:?},")?;
                if let Some(h) = h_star {
                    write!(out, "{:?}", crate::analysis::star_norm(h, &z))?;
                }
                writeln!(
                    out,
                    ",{:?},{:?},{:?}",
                    trace.grad_error_norms()[idx],
                    k * de,
                    k.powf(s) * de
                )?;
            }
            None => writeln!(out, ",,{:?},,", trace.grad_error_norms()[idx])?,
        }
    }
    Ok(())
}

pub fn trace_csv(problem: &ProblemInstance, trace: &RunTrace) -> String {
    let mut buf = Vec::new();
    write_trace_csv(&mut buf, problem, trace).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

/// One JSON object per verdict.
pub fn report_jsonl(verdicts: &[Verdict]) -> String {
    verdicts
        .iter()
        .map(|v| serde_json::to_string(v).expect("verdicts serialize") + "\n")
        .collect()
}

fn report_fields(rep: &RateReport) -> String {
    let failed = rep.failed_claims().join(";");
    format!(
        "{:?},{:?},{:?},{:?},{},{}",
        rep.fitted_exponent,
        rep.fitted_coefficient,
        rep.residual,
        rep.tail_limsup,
        rep.passed(),
        failed
    )
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for row in rows {
        let fields = match &row.report {
            Some(rep) => report_fields(rep),
            None => ",,,,,".to_string(),
        };
        let status = match &row.status {
            RowStatus::Error(msg) => format!("error: {}", msg.replace([',', '\n'], " ")),
            other => other.label(),
        };
        out.push_str(&format!("{:?},{:?},{status},{fields}\n", row.r, row.s));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{make_example, ExampleSpec};
    use crate::solvers::{run_ig, StepsizeSchedule};
    use nalgebra::DVector;

    #[test]
    fn trace_table_shape() {
        let prob = make_example(&ExampleSpec::LowerPair { l: 1.0 }).unwrap();
        let sched = StepsizeSchedule::new(1.0, 1.0).unwrap();
        let tr = run_ig(&prob, &sched, &DVector::from_element(1, 2.0), 5, &[0, 1], false).unwrap();
        let csv = trace_csv(&prob, &tr);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], TRACE_HEADER);
        assert_eq!(lines.len(), 6);
        // Cycle 1 starts at 2 with x* = 0 and H* = 2.
        let first: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(first[0], "1");
        assert_eq!(first[1], "1.0");
        assert_eq!(first[2], "2.0");
        assert_eq!(first[3], format!("{:?}", 8f64.sqrt()));
        assert!(lines.iter().all(|l| l.split(',').count() == 7));
    }

    #[test]
    fn floats_round_trip_through_the_table() {
        let prob = make_example(&ExampleSpec::Octet).unwrap();
        let sched = StepsizeSchedule::new(1.0, 0.75).unwrap();
        let order: Vec<usize> = (0..8).collect();
        let tr = run_ig(&prob, &sched, &DVector::from_element(2, 1.0), 50, &order, false).unwrap();
        let csv = trace_csv(&prob, &tr);
        for (idx, line) in csv.lines().skip(1).enumerate() {
            let alpha: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
            assert_eq!(alpha, tr.alphas()[idx]);
        }
    }
}
