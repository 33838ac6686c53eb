//! Plain-text matrix and vector files.
//!
//! A matrix file starts with a header `n m d epsilon1` followed by one line
//! per column, `j: r₁:w₁ r₂:w₂ ...`, with rows ascending. Weights are
//! printed with 17 significant digits so a round trip is bit-faithful.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use minexp::{BipartiteGraph, MeasurementMatrix};

/// Column sums must equal `d` within this tolerance.
pub const CHECKSUM_TOL: f64 = 1e-9;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("checksum mismatch: {0}")]
    ChecksumMismatch(String),
}

fn format_err(line: usize, msg: impl Into<String>) -> IoError {
    IoError::Format { line, msg: msg.into() }
}

pub fn format_matrix(a: &MeasurementMatrix) -> String {
    let mut out = format!("{} {} {} {:.16e}\n", a.n(), a.m(), a.d(), a.epsilon1());
    for (j, (rows, ws)) in a.graph().columns().iter().zip(a.weights()).enumerate() {
        write!(out, "{j}:").unwrap();
        for (r, w) in rows.iter().zip(ws) {
            write!(out, " {r}:{w:.16e}").unwrap();
        }
        out.push('\n');
    }
    out
}

fn parse_num<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T, IoError> {
    tok.parse().map_err(|_| format_err(line, format!("bad {what} `{tok}`")))
}

pub fn parse_matrix(text: &str) -> Result<MeasurementMatrix, IoError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
    let (hl, header) = lines.next().ok_or_else(|| format_err(1, "empty file"))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 4 {
        return Err(format_err(hl, "header must be `n m d epsilon1`"));
    }
    let n: usize = parse_num(toks[0], hl, "n")?;
    let m: usize = parse_num(toks[1], hl, "m")?;
    let d: usize = parse_num(toks[2], hl, "d")?;
    let eps1: f64 = parse_num(toks[3], hl, "epsilon1")?;

    let mut columns = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for (ln, line) in lines {
        let (idx, body) = line.split_once(':').ok_or_else(|| format_err(ln, "missing `j:` prefix"))?;
        let j: usize = parse_num(idx.trim(), ln, "column index")?;
        if j != columns.len() {
            return Err(format_err(ln, format!("expected column {}, found {j}", columns.len())));
        }
        let mut rows = Vec::new();
        let mut ws = Vec::new();
        for entry in body.split_whitespace() {
            let (r, w) = entry.split_once(':').ok_or_else(|| format_err(ln, format!("bad entry `{entry}`")))?;
            let r: usize = parse_num(r, ln, "row")?;
            let w: f64 = parse_num(w, ln, "weight")?;
            if r >= m {
                return Err(format_err(ln, format!("row {r} out of range for m = {m}")));
            }
            if rows.last().is_some_and(|&p| p >= r) {
                return Err(format_err(ln, "rows must be strictly ascending"));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(format_err(ln, format!("weight {w} must be positive")));
            }
            rows.push(r);
            ws.push(w);
        }
        if rows.is_empty() || rows.len() > d {
            return Err(format_err(ln, format!("column has {} entries, expected 1..={d}", rows.len())));
        }
        let sum: f64 = ws.iter().sum();
        if (sum - d as f64).abs() > CHECKSUM_TOL {
            return Err(IoError::ChecksumMismatch(format!("column {j} sums to {sum}, expected {d}")));
        }
        columns.push(rows);
        weights.push(ws);
    }
    if columns.len() != n {
        return Err(IoError::ChecksumMismatch(format!("header declares {n} columns, body has {}", columns.len())));
    }
    let graph = BipartiteGraph::new(m, d, columns).map_err(|e| format_err(hl, e.to_string()))?;
    MeasurementMatrix::with_weights(graph, weights, eps1).map_err(|e| format_err(hl, e.to_string()))
}

fn read(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::Io { path: path.display().to_string(), source })
}

fn write(path: &Path, text: &str) -> Result<(), IoError> {
    fs::write(path, text).map_err(|source| IoError::Io { path: path.display().to_string(), source })
}

pub fn write_matrix(path: &Path, a: &MeasurementMatrix) -> Result<(), IoError> {
    write(path, &format_matrix(a))
}

pub fn read_matrix(path: &Path) -> Result<MeasurementMatrix, IoError> {
    parse_matrix(&read(path)?)
}

/// One value per line, 17 significant digits.
pub fn format_vector(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.16e}\n")).collect()
}

/// Whitespace-separated values; `#` starts a comment.
pub fn parse_vector(text: &str) -> Result<Vec<f64>, IoError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line.split_whitespace() {
            out.push(parse_num(tok, i + 1, "value")?);
        }
    }
    Ok(out)
}

pub fn read_vector(path: &Path) -> Result<Vec<f64>, IoError> {
    parse_vector(&read(path)?)
}

pub fn write_vector(path: &Path, v: &[f64]) -> Result<(), IoError> {
    write(path, &format_vector(v))
}
