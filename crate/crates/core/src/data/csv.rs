//! Headerless numeric CSV.

use std::fmt::Write as _;
use std::path::Path;

use faer::{Mat, MatRef};

use crate::error::{Error, Result};

/// Rows joined by `,` and terminated by `\n`, shortest round-trip decimals.
pub fn matrix_to_string(m: MatRef<'_, f64>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", m.read(i, j));
        }
        out.push('\n');
    }
    out
}

pub fn emit_csv_matrix(m: MatRef<'_, f64>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, matrix_to_string(m)).map_err(|e| Error::io(path, e))
}

/// Parses numeric rows; blank lines and lines starting with `#` are skipped.
pub fn parse_matrix(text: &str) -> Result<Mat<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(',')
            .map(|s| {
                s.trim().parse::<f64>().map_err(|e| {
                    Error::Format(format!("line {}: bad number '{s}': {e}", lineno + 1))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Format(format!(
                    "line {}: expected {} columns, found {}",
                    lineno + 1,
                    first.len(),
                    row.len()
                )));
            }
        }
        rows.push(row);
    }
    let cols = rows.first().map_or(0, Vec::len);
    Ok(Mat::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

pub fn read_csv_matrix(path: impl AsRef<Path>) -> Result<Mat<f64>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}
