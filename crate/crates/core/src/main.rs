use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use incro::analysis::Verdict;
use incro::experiment::{
    exit, report_jsonl, run_config, run_preset, sweep, sweep_csv, write_trace_csv, ExperimentConfig,
    ExperimentError, PresetOutcome, RowStatus,
};
use incro::problem::{check_oracle_consistency, parse_instance};

#[derive(Parser)]
#[command(name = "incro", version, about = "Incremental gradient and Newton rate experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment described by a config file.
    Run { config: PathBuf },
    /// Run a pre-registered experiment.
    Preset {
        /// One of: slow-conv, rate-s, const-step-complexity, octet-order,
        /// in-star-rate, shared-min, inverse-k, const-step, chung.
        name: String,
        /// Directory for traces and reports.
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Run a config over a grid of stepsize parameters.
    Sweep {
        config: PathBuf,
        #[arg(long = "R", value_delimiter = ',', num_args = 1.., required = true)]
        r: Vec<f64>,
        #[arg(long = "s", value_delimiter = ',', num_args = 1.., required = true)]
        s: Vec<f64>,
        /// Write the CSV here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check component gradients and Hessians of an instance file against
    /// finite differences.
    CheckOracle {
        instance: PathBuf,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn print_verdicts(verdicts: &[Verdict]) {
    for v in verdicts {
        let tag = match v.pass {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "SKIP",
        };
        match (v.measured, v.bound) {
            (Some(m), Some(b)) => println!("[{tag}] {}: measured {m:e}, bound {b:e}, tol {} ({})", v.claim, v.tol, v.note),
            _ => println!("[{tag}] {}: {}", v.claim, v.note),
        }
    }
}

fn verdict_code(verdicts: &[Verdict]) -> i32 {
    if verdicts.iter().any(Verdict::failed) {
        exit::VERDICT_FAILURE
    } else {
        exit::PASS
    }
}

fn load_config(path: &Path) -> Result<ExperimentConfig, ExperimentError> {
    let text = fs::read_to_string(path).map_err(|e| ExperimentError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    ExperimentConfig::parse(&text)
}

fn write(path: &Path, text: &str) -> Result<(), ExperimentError> {
    fs::write(path, text).map_err(|e| ExperimentError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn cmd_run(config: &Path) -> Result<i32, ExperimentError> {
    let cfg = load_config(config)?;
    let out = run_config(&cfg)?;
    let rep = &out.report;
    println!(
        "{} R={} s={} cycles={}: fitted exponent {:.6} (coefficient {:e}, residual {:e}), tail max k^{} dist {:e}",
        rep.method.as_str(),
        rep.r,
        rep.s,
        rep.cycles,
        rep.fitted_exponent,
        rep.fitted_coefficient,
        rep.residual,
        rep.t,
        rep.tail_limsup
    );
    print_verdicts(&rep.verdicts);
    Ok(verdict_code(&rep.verdicts))
}

fn write_preset(out_dir: &Path, outcome: &PresetOutcome) -> Result<(), ExperimentError> {
    fs::create_dir_all(out_dir).map_err(|e| ExperimentError::Io {
        path: out_dir.to_path_buf(),
        source: e,
    })?;
    for run in &outcome.runs {
        let stem = format!("{}_{}", outcome.name, run.label);
        let csv_path = out_dir.join(format!("{stem}.csv"));
        let file = fs::File::create(&csv_path).map_err(|e| ExperimentError::Io {
            path: csv_path.clone(),
            source: e,
        })?;
        let mut w = std::io::BufWriter::new(file);
        write_trace_csv(&mut w, &run.problem, &run.trace)
            .and_then(|_| std::io::Write::flush(&mut w))
            .map_err(|e| ExperimentError::Io {
                path: csv_path.clone(),
                source: e,
            })?;
        write(&out_dir.join(format!("{stem}.jsonl")), &report_jsonl(&run.report.verdicts))?;
    }
    if !outcome.complexity.is_empty() {
        let lines: String = outcome
            .complexity
            .iter()
            .map(|p| serde_json::to_string(p).expect("points serialize") + "\n")
            .collect();
        write(&out_dir.join(format!("{}_points.jsonl", outcome.name)), &lines)?;
    }
    write(&out_dir.join(format!("{}.jsonl", outcome.name)), &report_jsonl(&outcome.verdicts))
}

fn cmd_preset(name: &str, out_dir: &Path) -> Result<i32, ExperimentError> {
    let outcome = run_preset(name)?;
    write_preset(out_dir, &outcome)?;
    for run in &outcome.runs {
        println!(
            "{}: fitted exponent {:.6} over the final {} of {} cycles",
            run.label, run.report.fitted_exponent, run.report.tail_window, run.report.cycles
        );
    }
    for note in &outcome.notes {
        println!("note: {note}");
    }
    print_verdicts(&outcome.verdicts);
    Ok(verdict_code(&outcome.verdicts))
}

fn cmd_sweep(config: &Path, r: &[f64], s: &[f64], out: Option<&Path>) -> Result<i32, ExperimentError> {
    let cfg = load_config(config)?;
    let rows = sweep(&cfg, r, s)?;
    let csv = sweep_csv(&rows);
    match out {
        Some(p) => write(p, &csv)?,
        None => print!("{csv}"),
    }
    Ok(if rows.iter().all(|row| row.status == RowStatus::Pass) {
        exit::PASS
    } else {
        exit::VERDICT_FAILURE
    })
}

fn cmd_check_oracle(path: &Path, samples: usize, seed: u64) -> Result<i32, ExperimentError> {
    let text = fs::read_to_string(path).map_err(|e| ExperimentError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let problem = parse_instance(&text)?;
    let mut flagged = false;
    for (i, comp) in problem.components().iter().enumerate() {
        let rep = check_oracle_consistency(comp.as_ref(), samples, seed.wrapping_add(i as u64));
        flagged |= rep.flagged();
        println!(
            "component {}: gradient relerr {:e}, hessian relerr {:e}{}",
            i + 1,
            rep.max_grad_relerr,
            rep.max_hess_relerr,
            if rep.flagged() { " FLAGGED" } else { "" }
        );
    }
    match problem.constants() {
        Ok(k) => println!("c = {:e}, L = {:e}, M = {:e}, B = {:e}", k.c_strong, k.l_sum, k.m, k.b),
        Err(e) => println!("constants unavailable: {e}"),
    }
    Ok(if flagged { exit::VERDICT_FAILURE } else { exit::PASS })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config } => cmd_run(config),
        Command::Preset { name, out } => cmd_preset(name, out),
        Command::Sweep { config, r, s, out } => cmd_sweep(config, r, s, out.as_deref()),
        Command::CheckOracle { instance, samples, seed } => cmd_check_oracle(instance, *samples, *seed),
    };
    let code = match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
