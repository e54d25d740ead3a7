//! Plain-text instance files.
//!
//! ```text
//! component 1
//! <P row 1>
//! ...
//! <P row n>
//! <q>
//! <r>
//! component 2
//! ...
//! ```
//!
//! Entries are written with 17 significant digits, which round-trips every
//! `f64` exactly. Blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use super::{ProblemError, ProblemInstance, QuadraticComponent};

fn fmt_entry(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_instance(problem: &ProblemInstance) -> Result<String, ProblemError> {
    let quads = problem.quadratics().ok_or(ProblemError::NonQuadratic)?;
    let n = problem.dim();
    let mut out = String::new();
    for (i, q) in quads.iter().enumerate() {
        writeln!(out, "component {}", i + 1).unwrap();
        for row in 0..n {
            let line: Vec<String> = (0..n).map(|col| fmt_entry(q.p()[(row, col)])).collect();
            writeln!(out, "{}", line.join(" ")).unwrap();
        }
        let line: Vec<String> = q.q().iter().map(|&v| fmt_entry(v)).collect();
        writeln!(out, "{}", line.join(" ")).unwrap();
        writeln!(out, "{}", fmt_entry(q.r())).unwrap();
    }
    Ok(out)
}

fn parse_row(line: usize, text: &str) -> Result<Vec<f64>, ProblemError> {
    text.split_whitespace()
        .map(|tok| {
            tok.parse::<f64>().map_err(|e| ProblemError::Parse {
                line,
                msg: format!("bad number {tok:?}: {e}"),
            })
        })
        .collect()
}

pub fn parse_instance(text: &str) -> Result<ProblemInstance, ProblemError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .peekable();

    let mut components = Vec::new();
    let mut dim: Option<usize> = None;
    while let Some((lineno, header)) = lines.next() {
        let expected = components.len() + 1;
        let index = header
            .strip_prefix("component")
            .map(str::trim)
            .and_then(|s| s.parse::<usize>().ok());
        if index != Some(expected) {
            return Err(ProblemError::Parse {
                line: lineno,
                msg: format!("expected `component {expected}`, found {header:?}"),
            });
        }

        let mut next_row = |what: &str| -> Result<(usize, Vec<f64>), ProblemError> {
            let (l, t) = lines.next().ok_or(ProblemError::Parse {
                line: lineno,
                msg: format!("unexpected end of file while reading {what}"),
            })?;
            Ok((l, parse_row(l, t)?))
        };

        let (l0, first) = next_row("P")?;
        let n = first.len();
        match dim {
            None if n == 0 => {
                return Err(ProblemError::Parse {
                    line: l0,
                    msg: "empty matrix row".into(),
                })
            }
            None => dim = Some(n),
            Some(d) if d != n => {
                return Err(ProblemError::Parse {
                    line: l0,
                    msg: format!("row has {n} entries, expected {d}"),
                })
            }
            Some(_) => {}
        }
        let mut entries = first;
        for _ in 1..n {
            let (l, row) = next_row("P")?;
            if row.len() != n {
                return Err(ProblemError::Parse {
                    line: l,
                    msg: format!("row has {} entries, expected {n}", row.len()),
                });
            }
            entries.extend(row);
        }
        let (lq, q) = next_row("q")?;
        if q.len() != n {
            return Err(ProblemError::Parse {
                line: lq,
                msg: format!("q has {} entries, expected {n}", q.len()),
            });
        }
        let (lr, r) = next_row("r")?;
        if r.len() != 1 {
            return Err(ProblemError::Parse {
                line: lr,
                msg: "r must be a single number".into(),
            });
        }
        let p = DMatrix::from_row_slice(n, n, &entries);
        components.push(QuadraticComponent::new(p, DVector::from_vec(q), r[0]).map_err(|e| {
            ProblemError::Parse {
                line: lineno,
                msg: e.to_string(),
            }
        })?);
    }
    ProblemInstance::from_quadratics(components)
}
