use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use ctrlsel::lti::{load_system, SystemFormat};
use ctrlsel::metrics::{MetricKind, RankPolicy};
use ctrlsel::oracle::counterexample_system;
use ctrlsel::{Error, LtiSystem, Result};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::MetricArgs;

/// `counterexample`, `A.csv,candidates.csv`, or a JSON file.
pub fn resolve_system(spec: &str) -> Result<LtiSystem> {
    if spec == "counterexample" {
        return Ok(counterexample_system());
    }
    if let Some((a, c)) = spec.split_once(',') {
        return load_system(Path::new(a), SystemFormat::CsvPair, Some(Path::new(c)));
    }
    load_system(Path::new(spec), SystemFormat::Json, None)
}

pub fn resolve_metric(args: &MetricArgs) -> Result<(MetricKind, RankPolicy)> {
    let weight = args.weight.as_deref().map(read_matrix).transpose()?;
    let metric = MetricKind::parse(&args.metric, weight)?;
    let policy = RankPolicy::new(args.rank_tol, RankPolicy::default().abs_floor)?;
    Ok((metric, policy))
}

fn numbers(line: &str) -> Result<Vec<f64>> {
    line.split(|c: char| c == ',' || c == ';' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|e| Error::Parse(format!("`{t}`: {e}"))))
        .collect()
}

/// Matrix from CSV rows or a JSON array of rows.
pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>> {
    let text = fs::read_to_string(path)?;
    let rows: Vec<Vec<f64>> = if text.trim_start().starts_with('[') {
        serde_json::from_str(&text)?
    } else {
        text.lines().filter(|l| !l.trim().is_empty()).map(numbers).collect::<Result<_>>()?
    };
    let cols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || cols == 0 || rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Parse(format!("{}: expected a non-empty rectangular matrix", path.display())));
    }
    Ok(DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

/// Vector from a JSON array or separated numbers.
pub fn read_vector(path: &Path) -> Result<DVector<f64>> {
    let text = fs::read_to_string(path)?;
    let v: Vec<f64> = if text.trim_start().starts_with('[') {
        serde_json::from_str(&text)?
    } else {
        numbers(&text)?
    };
    if v.is_empty() {
        return Err(Error::Parse(format!("{}: empty vector", path.display())));
    }
    Ok(DVector::from_vec(v))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("output types serialize")
}

/// Prints `json` and, if requested, writes it to `out` too.
pub fn emit_json(json: &str, out: Option<&PathBuf>) -> Result<()> {
    if let Some(path) = out {
        let mut f = fs::File::create(path)?;
        writeln!(f, "{json}")?;
    }
    print_out(json)
}

/// Writes `text` and a newline to stdout; a closed pipe is not an error.
pub fn print_out(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}").and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}
