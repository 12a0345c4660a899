//! Plain-text parameter checkpoints.
//!
//! ```text
//! RDAE1
//! <d> <p> <activation>
//! W rows (p lines of d values)
//! ---
//! c (one line of p values)
//! ---
//! A rows (d lines of p values)
//! ---
//! b (one line of d values)
//! ```
//!
//! Values are written with 17 significant digits, so a load after a save is
//! bit-exact.

use std::fmt::Write as _;
use std::path::Path;

use faer::Mat;

use crate::activation::Activation;
use crate::autoencoder::AutoEncoderParams;
use crate::error::{Error, Result};

pub const MAGIC: &str = "RDAE1";
const SEPARATOR: &str = "---";

fn fmt_row(out: &mut String, vals: impl Iterator<Item = f64>) {
    let cells: Vec<String> = vals.map(|v| format!("{v:.16e}")).collect();
    out.push_str(&cells.join(","));
    out.push('\n');
}

pub fn to_string(params: &AutoEncoderParams) -> String {
    let (p, d) = (params.hidden_dim(), params.input_dim());
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "{d} {p} {}", params.activation);
    for i in 0..p {
        fmt_row(&mut out, (0..d).map(|j| params.w.read(i, j)));
    }
    let _ = writeln!(out, "{SEPARATOR}");
    fmt_row(&mut out, params.c.iter().copied());
    let _ = writeln!(out, "{SEPARATOR}");
    for i in 0..d {
        fmt_row(&mut out, (0..p).map(|j| params.a.read(i, j)));
    }
    let _ = writeln!(out, "{SEPARATOR}");
    fmt_row(&mut out, params.b.iter().copied());
    out
}

fn parse_row(line: &str, expected: usize, what: &str) -> Result<Vec<f64>> {
    let vals = line
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Format(format!("{what}: bad number '{s}': {e}")))
        })
        .collect::<Result<Vec<f64>>>()?;
    if vals.len() != expected {
        return Err(Error::Format(format!(
            "{what}: expected {expected} values, found {}",
            vals.len()
        )));
    }
    Ok(vals)
}

struct Cursor<'a> {
    lines: std::str::Lines<'a>,
}

impl<'a> Cursor<'a> {
    fn next(&mut self, what: &str) -> Result<&'a str> {
        self.lines
            .next()
            .ok_or_else(|| Error::Format(format!("checkpoint truncated before {what}")))
    }

    fn separator(&mut self, before: &str) -> Result<()> {
        let line = self.next(before)?;
        if line.trim() != SEPARATOR {
            return Err(Error::Format(format!(
                "expected block separator '{SEPARATOR}' before {before}, found '{line}'"
            )));
        }
        Ok(())
    }

    fn block(&mut self, rows: usize, cols: usize, what: &str) -> Result<Vec<Vec<f64>>> {
        (0..rows).map(|_| parse_row(self.next(what)?, cols, what)).collect()
    }
}

pub fn from_str(text: &str) -> Result<AutoEncoderParams> {
    let mut cur = Cursor { lines: text.lines() };
    let magic = cur.next("magic")?;
    if magic.trim() != MAGIC {
        return Err(Error::Format(format!("expected '{MAGIC}' header, found '{magic}'")));
    }
    let header = cur.next("dimensions")?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(Error::Format(format!("bad dimension line '{header}'")));
    }
    let parse_dim = |s: &str| {
        s.parse::<usize>()
            .map_err(|e| Error::Format(format!("bad dimension '{s}': {e}")))
    };
    let d = parse_dim(fields[0])?;
    let p = parse_dim(fields[1])?;
    let activation: Activation = fields[2]
        .parse()
        .map_err(|e: Error| Error::Format(e.to_string()))?;

    let w = cur.block(p, d, "W")?;
    cur.separator("c")?;
    let c = parse_row(cur.next("c")?, p, "c")?;
    cur.separator("A")?;
    let a = cur.block(d, p, "A")?;
    cur.separator("b")?;
    let b = parse_row(cur.next("b")?, d, "b")?;
    if cur.lines.any(|l| !l.trim().is_empty()) {
        return Err(Error::Format("trailing content after b".into()));
    }
    AutoEncoderParams::new(
        Mat::from_fn(p, d, |i, j| w[i][j]),
        c,
        Mat::from_fn(d, p, |i, j| a[i][j]),
        b,
        activation,
    )
    .map_err(|e| Error::Format(e.to_string()))
}

pub fn save(params: &AutoEncoderParams, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_string(params)).map_err(|e| Error::io(path, e))
}

pub fn load(path: impl AsRef<Path>) -> Result<AutoEncoderParams> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_str(&text)
}
