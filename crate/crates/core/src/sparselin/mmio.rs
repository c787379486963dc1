//! MatrixMarket coordinate/array files and plain-text vectors.

use super::csr::SparseMatrixCsr;
use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;

pub fn matrix_to_string(a: &SparseMatrixCsr) -> String {
    let mut s = String::with_capacity(32 * a.nnz() + 64);
    s.push_str("%%MatrixMarket matrix coordinate real general\n");
    let _ = writeln!(s, "{} {} {}", a.nrows(), a.ncols(), a.nnz());
    for i in 0..a.nrows() {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            let _ = writeln!(s, "{} {} {:.17e}", i + 1, j + 1, v);
        }
    }
    s
}

/// Parses a real coordinate matrix (`general` or `symmetric`).
pub fn matrix_from_str(text: &str) -> Result<SparseMatrixCsr> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::MatrixMarket("empty file".into()))?
        .to_ascii_lowercase();
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() < 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" || fields[2] != "coordinate" {
        return Err(Error::MatrixMarket(format!("unsupported header: {header}")));
    }
    if fields[3] != "real" && fields[3] != "integer" {
        return Err(Error::MatrixMarket(format!("unsupported field type {}", fields[3])));
    }
    let symmetric = match fields[4] {
        "general" => false,
        "symmetric" => true,
        other => return Err(Error::MatrixMarket(format!("unsupported symmetry {other}"))),
    };
    let mut body = lines.filter(|l| !l.trim().is_empty() && !l.starts_with('%'));
    let size = body.next().ok_or_else(|| Error::MatrixMarket("missing size line".into()))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::MatrixMarket(format!("bad size line: {size}"))))
        .collect::<Result<_>>()?;
    if dims.len() != 3 {
        return Err(Error::MatrixMarket(format!("bad size line: {size}")));
    }
    let (m, n, nnz) = (dims[0], dims[1], dims[2]);
    let mut t = Vec::with_capacity(if symmetric { 2 * nnz } else { nnz });
    for line in body.by_ref().take(nnz) {
        let tok: Vec<&str> = line.split_whitespace().collect();
        let bad = || Error::MatrixMarket(format!("bad entry: {line}"));
        if tok.len() < 3 {
            return Err(bad());
        }
        let i: usize = tok[0].parse().map_err(|_| bad())?;
        let j: usize = tok[1].parse().map_err(|_| bad())?;
        let v: f64 = tok[2].parse().map_err(|_| bad())?;
        if i == 0 || j == 0 || i > m || j > n {
            return Err(bad());
        }
        t.push((i - 1, j - 1, v));
        if symmetric && i != j {
            t.push((j - 1, i - 1, v));
        }
    }
    let expected = if symmetric { t.len() } else { nnz };
    if t.len() != expected || (!symmetric && t.len() != nnz) {
        return Err(Error::MatrixMarket(format!("expected {nnz} entries, found {}", t.len())));
    }
    SparseMatrixCsr::from_triplets(m, n, &t)
}

pub fn write_matrix(path: &Path, a: &SparseMatrixCsr) -> Result<()> {
    std::fs::write(path, matrix_to_string(a))?;
    Ok(())
}

pub fn read_matrix(path: &Path) -> Result<SparseMatrixCsr> {
    matrix_from_str(&std::fs::read_to_string(path)?)
}

/// One-column MatrixMarket array.
pub fn vector_to_string(v: &[f64]) -> String {
    let mut s = String::with_capacity(26 * v.len() + 64);
    s.push_str("%%MatrixMarket matrix array real general\n");
    let _ = writeln!(s, "{} 1", v.len());
    for x in v {
        let _ = writeln!(s, "{x:.17e}");
    }
    s
}

/// Accepts either a MatrixMarket array or plain text with one value per line.
pub fn vector_from_str(text: &str) -> Result<Vec<f64>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let mut values = Vec::new();
    let mut expected = None;
    if text.trim_start().to_ascii_lowercase().starts_with("%%matrixmarket") {
        let mut body = lines.by_ref().filter(|l| !l.starts_with('%'));
        let size = body.next().ok_or_else(|| Error::MatrixMarket("missing size line".into()))?;
        let dims: Vec<usize> = size.split_whitespace().filter_map(|t| t.parse().ok()).collect();
        if dims.len() != 2 || dims[1] != 1 {
            return Err(Error::MatrixMarket(format!("not a column vector: {size}")));
        }
        expected = Some(dims[0]);
        for l in body {
            values.push(parse_value(l)?);
        }
    } else {
        for l in lines.filter(|l| !l.starts_with('%') && !l.starts_with('#')) {
            values.push(parse_value(l)?);
        }
    }
    if let Some(n) = expected {
        if n != values.len() {
            return Err(Error::MatrixMarket(format!("expected {n} values, found {}", values.len())));
        }
    }
    Ok(values)
}

fn parse_value(l: &str) -> Result<f64> {
    l.trim()
        .parse()
        .map_err(|_| Error::MatrixMarket(format!("bad value: {l}")))
}

pub fn write_vector(path: &Path, v: &[f64]) -> Result<()> {
    std::fs::write(path, vector_to_string(v))?;
    Ok(())
}

pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    vector_from_str(&std::fs::read_to_string(path)?)
}
