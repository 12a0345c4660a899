//! Normalized Gaussian Gram matrices.
//!
//! For a point set `x_1..x_N` and bandwidth `sigma`, the normalized Gram matrix is
//! `A_ij = (1/N) exp(-|x_i - x_j|^2 / (2 sigma^2))`. Its diagonal is exactly `1/N`,
//! so the trace is one and the spectrum can be read as a probability vector.

use faer::{Mat, MatRef};

use crate::error::{Error, Result};
use crate::linalg;

/// Bandwidth and normalization count for [`gaussian_kernel`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub sigma: f64,
    pub n: usize,
}

impl KernelSpec {
    pub fn new(sigma: f64, n: usize) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::usage(format!("kernel bandwidth must be > 0, got {sigma}")));
        }
        if n == 0 {
            return Err(Error::usage("kernel normalization count must be >= 1"));
        }
        Ok(Self { sigma, n })
    }
}

/// `(1/n) exp(-|x_i - x_j|^2 / (2 sigma^2))`.
pub fn gaussian_kernel(x_i: &[f64], x_j: &[f64], spec: KernelSpec) -> Result<f64> {
    if x_i.len() != x_j.len() {
        return Err(Error::usage(format!(
            "kernel arguments differ in dimension ({} vs {})",
            x_i.len(),
            x_j.len()
        )));
    }
    if x_i.iter().chain(x_j).any(|v| !v.is_finite()) {
        return Err(Error::usage("kernel arguments must be finite"));
    }
    let dist2: f64 = x_i.iter().zip(x_j).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((-dist2 / (2.0 * spec.sigma * spec.sigma)).exp() / spec.n as f64)
}

/// A symmetric, trace-one, PSD similarity matrix with diagonal `1/N`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedGram(Mat<f64>);

impl NormalizedGram {
    /// Wraps a matrix after checking shape, symmetry, diagonal and entry range.
    pub fn from_matrix(m: Mat<f64>) -> Result<Self> {
        let n = m.nrows();
        if n != m.ncols() || n == 0 {
            return Err(Error::usage("normalized Gram matrix must be square and non-empty"));
        }
        let inv_n = 1.0 / n as f64;
        for i in 0..n {
            if (m.read(i, i) - inv_n).abs() > 1e-12 {
                return Err(Error::usage(format!(
                    "diagonal entry {i} is {}, expected 1/N = {inv_n}",
                    m.read(i, i)
                )));
            }
            for j in 0..n {
                let v = m.read(i, j);
                if !v.is_finite() || v < -1e-12 || v > inv_n + 1e-12 {
                    return Err(Error::usage(format!("entry ({i},{j}) = {v} outside [0, 1/N]")));
                }
                if v != m.read(j, i) {
                    return Err(Error::usage(format!("matrix not symmetric at ({i},{j})")));
                }
            }
        }
        Ok(Self(m))
    }

    pub fn size(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_ref(&self) -> MatRef<'_, f64> {
        self.0.as_ref()
    }

    pub fn into_inner(self) -> Mat<f64> {
        self.0
    }
}

/// Normalized Gaussian Gram matrix of the rows of `x`.
///
/// Off-diagonal distances are accumulated coordinate by coordinate, and the
/// diagonal is written as exactly `1/N`.
pub fn normalized_gram(x: MatRef<'_, f64>, sigma: f64) -> Result<NormalizedGram> {
    let n = x.nrows();
    if n < 2 {
        return Err(Error::usage(format!("need at least 2 points for a Gram matrix, got {n}")));
    }
    if x.ncols() == 0 {
        return Err(Error::usage("points must have dimension >= 1"));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::usage(format!("kernel bandwidth must be > 0, got {sigma}")));
    }
    if !linalg::all_finite(x) {
        return Err(Error::usage("point matrix contains non-finite values"));
    }
    let inv_n = 1.0 / n as f64;
    let denom = 2.0 * sigma * sigma;
    // Row-major copy keeps the inner distance loop contiguous.
    let d = x.ncols();
    let rows: Vec<f64> = (0..n).flat_map(|i| (0..d).map(move |j| x.read(i, j))).collect();
    let mut a = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        a.write(i, i, inv_n);
        let xi = &rows[i * d..(i + 1) * d];
        for j in (i + 1)..n {
            let xj = &rows[j * d..(j + 1) * d];
            let mut dist2 = 0.0;
            for k in 0..d {
                let diff = xi[k] - xj[k];
                dist2 += diff * diff;
            }
            let v = inv_n * (-dist2 / denom).exp();
            a.write(i, j, v);
            a.write(j, i, v);
        }
    }
    Ok(NormalizedGram(a))
}

/// `(A o B) / tr(A o B)`.
pub fn hadamard_joint(a: &NormalizedGram, b: &NormalizedGram) -> Result<NormalizedGram> {
    if a.size() != b.size() {
        return Err(Error::usage(format!(
            "Gram sizes differ ({} vs {})",
            a.size(),
            b.size()
        )));
    }
    let prod = linalg::hadamard(a.as_ref(), b.as_ref())?;
    let tr = linalg::trace(prod.as_ref());
    if !(tr > 0.0) {
        return Err(Error::Internal(format!("Hadamard product has trace {tr}")));
    }
    let n = a.size();
    let inv_n = 1.0 / n as f64;
    let out = Mat::from_fn(n, n, |i, j| {
        if i == j {
            inv_n
        } else {
            (prod.read(i, j) / tr).min(inv_n)
        }
    });
    Ok(NormalizedGram(out))
}

/// `N (A o B)` without renormalizing the trace. This is the form the training
/// objective differentiates through.
pub(crate) fn scaled_hadamard(a: MatRef<'_, f64>, b: MatRef<'_, f64>) -> Result<Mat<f64>> {
    linalg::ensure_same_shape(a, b, "joint Gram")?;
    let n = a.nrows() as f64;
    Ok(Mat::from_fn(a.nrows(), a.ncols(), |i, j| {
        n * a.read(i, j) * b.read(i, j)
    }))
}
