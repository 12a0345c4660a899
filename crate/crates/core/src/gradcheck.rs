//! Central-difference verification of the Lagrangian gradients.

use faer::MatRef;

use crate::autoencoder::{lagrangian, lagrangian_gradients, AutoEncoderParams, Objective, ParamGrads};
use crate::error::{Error, Result};

/// Magnitude below which entries are compared absolutely.
pub const SMALL_MAGNITUDE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub relative: f64,
    pub absolute: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            relative: 1e-4,
            absolute: 1e-7,
        }
    }
}

/// Worst entry of one parameter block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockReport {
    pub name: &'static str,
    /// Largest relative error among entries above [`SMALL_MAGNITUDE`].
    pub max_relative_error: f64,
    /// Largest absolute error among entries below [`SMALL_MAGNITUDE`].
    pub max_absolute_error: f64,
    /// `(row, col)` of the entry with the largest error relative to its tolerance.
    pub worst_entry: (usize, usize),
    pub worst_analytic: f64,
    pub worst_numeric: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    /// Blocks in the order W, c, A, b.
    pub blocks: Vec<BlockReport>,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.blocks.iter().all(|b| b.passed)
    }

    pub fn max_relative_error(&self) -> f64 {
        self.blocks.iter().map(|b| b.max_relative_error).fold(0.0, f64::max)
    }
}

/// `(name, rows, cols)` of the four blocks, matching [`ParamGrads::flatten`].
fn block_shapes(d: usize, p: usize) -> [(&'static str, usize, usize); 4] {
    [("W", p, d), ("c", 1, p), ("A", d, p), ("b", 1, d)]
}

/// Copy of `params` with flattened entry `idx` moved by `h`.
pub fn perturb_entry(params: &AutoEncoderParams, idx: usize, h: f64) -> AutoEncoderParams {
    let (d, p) = (params.input_dim(), params.hidden_dim());
    let mut out = params.clone();
    let mut k = idx;
    if k < p * d {
        let v = out.w.read(k / d, k % d);
        out.w.write(k / d, k % d, v + h);
        return out;
    }
    k -= p * d;
    if k < p {
        out.c[k] += h;
        return out;
    }
    k -= p;
    if k < d * p {
        let v = out.a.read(k / p, k % p);
        out.a.write(k / p, k % p, v + h);
        return out;
    }
    out.b[k - d * p] += h;
    out
}

/// Compares `analytic` against central differences of the Lagrangian.
pub fn check_against(
    x: MatRef<'_, f64>,
    params: &AutoEncoderParams,
    obj: &Objective,
    analytic: &ParamGrads,
    h: f64,
    tol: Tolerance,
) -> Result<GradCheckReport> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::usage(format!("finite-difference step must be > 0, got {h}")));
    }
    let flat = analytic.flatten();
    let (d, p) = (params.input_dim(), params.hidden_dim());
    let mut blocks = Vec::with_capacity(4);
    let mut offset = 0;
    for (name, rows, cols) in block_shapes(d, p) {
        let mut report = BlockReport {
            name,
            max_relative_error: 0.0,
            max_absolute_error: 0.0,
            worst_entry: (0, 0),
            worst_analytic: 0.0,
            worst_numeric: 0.0,
            passed: true,
        };
        let mut worst_ratio = -1.0;
        for local in 0..rows * cols {
            let idx = offset + local;
            let plus = lagrangian(x, &perturb_entry(params, idx, h), obj)?.value;
            let minus = lagrangian(x, &perturb_entry(params, idx, -h), obj)?.value;
            let numeric = (plus - minus) / (2.0 * h);
            let an = flat[idx];
            let diff = (numeric - an).abs();
            let scale = an.abs().max(numeric.abs());
            let ratio = if scale < SMALL_MAGNITUDE {
                report.max_absolute_error = report.max_absolute_error.max(diff);
                diff / tol.absolute
            } else {
                let rel = diff / scale;
                report.max_relative_error = report.max_relative_error.max(rel);
                rel / tol.relative
            };
            if !(ratio <= 1.0) {
                report.passed = false;
            }
            if !(ratio <= worst_ratio) {
                worst_ratio = ratio;
                report.worst_entry = (local / cols, local % cols);
                report.worst_analytic = an;
                report.worst_numeric = numeric;
            }
        }
        offset += rows * cols;
        blocks.push(report);
    }
    Ok(GradCheckReport { blocks })
}

/// Checks [`lagrangian_gradients`] entry by entry.
pub fn gradient_check(
    x: MatRef<'_, f64>,
    params: &AutoEncoderParams,
    obj: &Objective,
    h: f64,
) -> Result<GradCheckReport> {
    let (_, analytic) = lagrangian_gradients(x, params, obj)?;
    check_against(x, params, obj, &analytic, h, Tolerance::default())
}
