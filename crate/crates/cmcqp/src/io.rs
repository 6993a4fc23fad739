//! Complex matrix text format shared by the CLI and file-based workflows.
//!
//! Line 1 holds `N M` (rows, columns); the next `N * M` lines hold `re im`
//! pairs in row-major order, printed with full double precision (shortest
//! round-trip decimal). Loaders reject NaN/Inf and malformed counts.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::problem::{CMatrix, Error, Result};

pub fn write_complex_matrix<W: Write>(out: &mut W, m: &CMatrix) -> std::io::Result<()> {
    writeln!(out, "{} {}", m.nrows(), m.ncols())?;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            writeln!(out, "{} {}", m[(i, j)].re, m[(i, j)].im)?;
        }
    }
    Ok(())
}

pub fn save_complex_matrix<P: AsRef<Path>>(path: P, m: &CMatrix) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_complex_matrix(&mut w, m)?;
    Ok(())
}

pub fn read_complex_matrix<R: BufRead>(input: R) -> Result<CMatrix> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::MatrixFormat("empty file".into()))??;
    let mut parts = header.split_whitespace();
    let rows: usize = parts
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::MatrixFormat("header must be `N M`".into()))?;
    let cols: usize = parts
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::MatrixFormat("header must be `N M`".into()))?;
    if rows == 0 || cols == 0 {
        return Err(Error::MatrixFormat("zero-sized matrix".into()));
    }
    let mut values = Vec::with_capacity(rows * cols);
    for (k, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let re: f64 = parts
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::MatrixFormat(format!("bad entry on line {}", k + 2)))?;
        let im: f64 = parts
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::MatrixFormat(format!("bad entry on line {}", k + 2)))?;
        if parts.next().is_some() {
            return Err(Error::MatrixFormat(format!(
                "trailing tokens on line {}",
                k + 2
            )));
        }
        if !re.is_finite() || !im.is_finite() {
            return Err(Error::MatrixFormat(format!(
                "non-finite entry on line {}",
                k + 2
            )));
        }
        values.push(Complex64::new(re, im));
        if values.len() > rows * cols {
            return Err(Error::MatrixFormat("more entries than N * M".into()));
        }
    }
    if values.len() != rows * cols {
        return Err(Error::MatrixFormat(format!(
            "expected {} entries, found {}",
            rows * cols,
            values.len()
        )));
    }
    // values arrive row-major
    Ok(CMatrix::from_fn(rows, cols, |i, j| values[i * cols + j]))
}

pub fn load_complex_matrix<P: AsRef<Path>>(path: P) -> Result<CMatrix> {
    read_complex_matrix(BufReader::new(File::open(path)?))
}
