//! QAPLIB instance and solution files, synthetic instances, and population
//! files.
//!
//! A `.dat` file is `n` followed by two `n × n` matrices; a `.sln` file is
//! `n`, the optimal objective, and a 1-based permutation. Which matrix is the
//! weight matrix differs between sources; [`parse_sln`] picks the order under
//! which the permutation's cost equals the declared objective.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::Rng;

use crate::diversity::Population;
use crate::error::{Error, Result};
use crate::instance::{MatrixOrder, Problem, QapInstance};
use crate::permutation::{Permutation, ProblemKind};
use crate::rng::rng_from_seed;

fn tokens(text: &str) -> impl Iterator<Item = &str> {
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
}

fn parse_number(tok: &str, position: usize) -> Result<f64> {
    tok.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::Parse {
            position,
            message: format!("'{tok}' is not a number"),
        })
}

fn parse_size(tok: &str, position: usize) -> Result<usize> {
    match tok.parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(Error::Parse {
            position,
            message: format!("'{tok}' is not a positive size"),
        }),
    }
}

/// Parses a `.dat` file. The first matrix becomes the weight matrix until a
/// solution file says otherwise.
pub fn parse_qaplib_dat(text: &str) -> Result<QapInstance> {
    let toks: Vec<&str> = tokens(text).collect();
    let first = toks.first().ok_or(Error::Parse {
        position: 0,
        message: "empty instance file".into(),
    })?;
    let n = parse_size(first, 0)?;
    let expected = 1 + 2 * n * n;
    if toks.len() != expected {
        return Err(Error::Parse {
            position: toks.len().min(expected),
            message: format!("expected {} matrix entries, found {}", 2 * n * n, toks.len() - 1),
        });
    }
    let values = toks[1..]
        .iter()
        .enumerate()
        .map(|(i, t)| parse_number(t, i + 1))
        .collect::<Result<Vec<f64>>>()?;
    let (a, b) = values.split_at(n * n);
    QapInstance::new(n, a.to_vec(), b.to_vec())
}

/// Serialises an instance in `.dat` layout (weight matrix first).
pub fn format_qaplib_dat(inst: &QapInstance) -> String {
    let n = inst.size();
    let mut out = format!("{n}\n\n");
    for m in [inst.weights(), inst.flows()] {
        for row in m.chunks(n) {
            let line: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolutionFile {
    pub n: usize,
    pub objective: f64,
    /// 0-based.
    pub permutation: Permutation,
}

pub fn parse_sln_text(text: &str) -> Result<SolutionFile> {
    let toks: Vec<&str> = tokens(text).collect();
    if toks.len() < 2 {
        return Err(Error::Parse {
            position: toks.len(),
            message: "solution file needs n and an objective".into(),
        });
    }
    let n = parse_size(toks[0], 0)?;
    let objective = parse_number(toks[1], 1)?;
    if toks.len() != n + 2 {
        return Err(Error::Parse {
            position: toks.len().min(n + 2),
            message: format!("expected {n} permutation entries, found {}", toks.len() - 2),
        });
    }
    let values = toks[2..]
        .iter()
        .enumerate()
        .map(|(i, t)| {
            t.parse::<usize>().map_err(|_| Error::Parse {
                position: i + 2,
                message: format!("'{t}' is not an integer"),
            })
        })
        .collect::<Result<Vec<usize>>>()?;
    let permutation = Permutation::from_one_based(&values)?;
    Ok(SolutionFile {
        n,
        objective,
        permutation,
    })
}

/// Fixes the matrix order against the declared objective and attaches the
/// optimum. `inst` must be fresh from [`parse_qaplib_dat`] (first matrix as
/// weights).
///
/// Exchanging the two matrices is the same as reading the permutation as its
/// inverse (`Σ w(i,j) f(a(i),a(j)) = Σ f(k,l) w(a⁻¹(k),a⁻¹(l))`), so the two
/// matrix orders cover both readings of the solution file.
pub fn resolve_solution(inst: &QapInstance, sol: &SolutionFile) -> Result<(QapInstance, MatrixOrder)> {
    if sol.n != inst.size() {
        return Err(Error::DimensionMismatch {
            expected: inst.size(),
            found: sol.n,
        });
    }
    for order in [MatrixOrder::FirstIsWeight, MatrixOrder::FirstIsFlow] {
        let mut candidate = match order {
            MatrixOrder::FirstIsWeight => inst.clone(),
            MatrixOrder::FirstIsFlow => inst.swapped(),
        };
        let cost = candidate.evaluate(&sol.permutation);
        if (cost - sol.objective).abs() <= 1e-9 * sol.objective.abs().max(1.0) {
            candidate.set_order(order);
            let resolved = candidate.with_optimum(sol.permutation.clone(), sol.objective)?;
            return Ok((resolved, order));
        }
    }
    Err(Error::SolutionMismatch(format!(
        "neither matrix order reproduces objective {}",
        sol.objective
    )))
}

pub fn parse_sln(text: &str, inst: &QapInstance) -> Result<(SolutionFile, QapInstance, MatrixOrder)> {
    let sol = parse_sln_text(text)?;
    let (resolved, how) = resolve_solution(inst, &sol)?;
    Ok((sol, resolved, how))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn read_dat(path: &Path) -> Result<QapInstance> {
    parse_qaplib_dat(&read_text(path)?)
}

/// Reads a `.dat` file and, when given, its `.sln` companion.
pub fn read_instance(dat: &Path, sln: Option<&Path>) -> Result<(QapInstance, Option<MatrixOrder>)> {
    let inst = read_dat(dat)?;
    match sln {
        None => Ok((inst, None)),
        Some(s) => {
            let (_, resolved, how) = parse_sln(&read_text(s)?, &inst)?;
            Ok((resolved, Some(how)))
        }
    }
}

/// Uniform integer matrices with entries in `[0, 100]`.
pub fn gen_synthetic_qap(n: usize, seed: u64) -> Result<QapInstance> {
    let mut rng = rng_from_seed(seed);
    let mut matrix = || -> Vec<f64> {
        (0..n * n)
            .map(|_| f64::from(rng.random_range(0..=100u32)))
            .collect()
    };
    let w = matrix();
    let f = matrix();
    QapInstance::new(n, w, f)
}

/// Population text: a header `n μ KIND`, then one member per line as
/// space-separated 1-based values.
pub fn format_population(p: &Population) -> String {
    let mut out = format!("{} {} {}\n", p.n(), p.mu(), p.kind());
    for m in p.members() {
        let line: Vec<String> = m.to_one_based().iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}

pub fn parse_population(text: &str, origin: &Path) -> Result<Population> {
    let bad = |line: usize, message: String| Error::PopulationFile {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines.next().ok_or_else(|| bad(1, "missing header".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(bad(hline, format!("header must be 'n mu kind', got '{header}'")));
    }
    let n: usize = fields[0]
        .parse()
        .map_err(|_| bad(hline, format!("bad n '{}'", fields[0])))?;
    let mu: usize = fields[1]
        .parse()
        .map_err(|_| bad(hline, format!("bad mu '{}'", fields[1])))?;
    let kind: ProblemKind = fields[2].parse().map_err(|e: Error| bad(hline, e.to_string()))?;
    let mut members = Vec::with_capacity(mu);
    for (ln, line) in lines {
        let values = line
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<Vec<usize>, _>>()
            .map_err(|_| bad(ln, format!("non-integer entry in '{line}'")))?;
        if values.len() != n {
            return Err(bad(ln, format!("expected {n} values, found {}", values.len())));
        }
        let p = Permutation::from_one_based(&values).map_err(|e| bad(ln, e.to_string()))?;
        members.push(p);
    }
    if members.len() != mu {
        return Err(bad(
            hline,
            format!("header announces {mu} members, file has {}", members.len()),
        ));
    }
    Population::new(kind, members).map_err(|e| bad(hline, e.to_string()))
}

pub fn read_population(path: &Path) -> Result<Population> {
    parse_population(&read_text(path)?, path)
}

pub fn write_population(p: &Population, path: &Path) -> Result<()> {
    fs::write(path, format_population(p)).map_err(|e| Error::io(path, e))
}
