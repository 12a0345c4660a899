//! Small dense helpers on top of `faer`.

use faer::{Mat, MatRef, Side};

use crate::error::{Error, Result};

/// Symmetric eigendecomposition with eigenvalues sorted in descending order.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, aligned with `eigenvalues`.
    pub eigenvectors: Mat<f64>,
}

impl EigenDecomposition {
    /// Decomposes `(m + m^T) / 2`.
    pub fn new(m: MatRef<'_, f64>) -> Result<Self> {
        let sym = eigen_input(m)?;
        let evd = sym.selfadjoint_eigendecomposition(Side::Lower);
        let s = evd.s().column_vector();
        let u = evd.u();
        let n = sym.nrows();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| s.read(j).total_cmp(&s.read(i)));
        let eigenvalues = order.iter().map(|&i| s.read(i)).collect();
        let eigenvectors = Mat::from_fn(n, n, |r, k| u.read(r, order[k]));
        Ok(Self {
            eigenvalues,
            eigenvectors,
        })
    }

    /// `U diag(f(lambda)) U^T`, symmetrized so that the result is exactly symmetric.
    pub fn spectral_map(&self, f: impl Fn(f64) -> f64) -> Mat<f64> {
        let n = self.eigenvalues.len();
        let weights: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let scaled = Mat::from_fn(n, n, |i, k| self.eigenvectors.read(i, k) * weights[k]);
        let full = &scaled * self.eigenvectors.transpose();
        symmetrize_owned(full)
    }
}

/// Eigenvalues only (descending) of the symmetrized matrix.
pub fn symmetric_eigenvalues(m: MatRef<'_, f64>) -> Result<Vec<f64>> {
    let sym = eigen_input(m)?;
    let mut vals = sym.selfadjoint_eigenvalues(Side::Lower);
    vals.sort_by(|a, b| b.total_cmp(a));
    Ok(vals)
}

/// Entries this far below the largest magnitude cannot move an eigenvalue.
const FLUSH_RATIO: f64 = 1e-100;

/// Symmetrized copy with negligible entries set to zero. faer's symmetric
/// eigensolver returns NaN on some matrices holding subnormal values, which
/// Gaussian Gram matrices produce whenever `exp` underflows.
fn eigen_input(m: MatRef<'_, f64>) -> Result<Mat<f64>> {
    let mut sym = symmetrize(m)?;
    let cutoff = FLUSH_RATIO * sym.as_ref().norm_max();
    let n = sym.nrows();
    for j in 0..n {
        for i in 0..n {
            if sym.read(i, j).abs() < cutoff {
                sym.write(i, j, 0.0);
            }
        }
    }
    Ok(sym)
}

/// `(m + m^T) / 2`. Errors if `m` is not square.
pub fn symmetrize(m: MatRef<'_, f64>) -> Result<Mat<f64>> {
    if m.nrows() != m.ncols() {
        return Err(Error::usage(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(Mat::from_fn(m.nrows(), m.ncols(), |i, j| {
        0.5 * (m.read(i, j) + m.read(j, i))
    }))
}

fn symmetrize_owned(m: Mat<f64>) -> Mat<f64> {
    let n = m.nrows();
    Mat::from_fn(n, n, |i, j| 0.5 * (m.read(i, j) + m.read(j, i)))
}

/// Entrywise product.
pub fn hadamard(a: MatRef<'_, f64>, b: MatRef<'_, f64>) -> Result<Mat<f64>> {
    ensure_same_shape(a, b, "hadamard product")?;
    Ok(Mat::from_fn(a.nrows(), a.ncols(), |i, j| {
        a.read(i, j) * b.read(i, j)
    }))
}

pub fn ensure_same_shape(a: MatRef<'_, f64>, b: MatRef<'_, f64>, what: &str) -> Result<()> {
    if a.nrows() != b.nrows() || a.ncols() != b.ncols() {
        return Err(Error::usage(format!(
            "{what}: shape mismatch {}x{} vs {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    Ok(())
}

pub fn all_finite(m: MatRef<'_, f64>) -> bool {
    (0..m.ncols()).all(|j| (0..m.nrows()).all(|i| m.read(i, j).is_finite()))
}

/// Builds a matrix from row slices. Rows must share a length.
pub fn from_rows(rows: &[Vec<f64>]) -> Result<Mat<f64>> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::usage("ragged rows"));
    }
    Ok(Mat::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

pub fn to_rows(m: MatRef<'_, f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m.read(i, j)).collect())
        .collect()
}

pub fn frobenius_norm(m: MatRef<'_, f64>) -> f64 {
    let mut acc = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            acc += m.read(i, j) * m.read(i, j);
        }
    }
    acc.sqrt()
}

/// Column sums of `m` as a vector (`m^T 1`).
pub fn column_sums(m: MatRef<'_, f64>) -> Vec<f64> {
    (0..m.ncols())
        .map(|j| (0..m.nrows()).map(|i| m.read(i, j)).sum())
        .collect()
}

/// Row sums of `m` (`m 1`).
pub fn row_sums(m: MatRef<'_, f64>) -> Vec<f64> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m.read(i, j)).sum())
        .collect()
}

pub fn trace(m: MatRef<'_, f64>) -> f64 {
    (0..m.nrows().min(m.ncols())).map(|i| m.read(i, i)).sum()
}

/// Rows of `m` selected by `indices`, in order.
pub fn select_rows(m: MatRef<'_, f64>, indices: &[usize]) -> Mat<f64> {
    Mat::from_fn(indices.len(), m.ncols(), |i, j| m.read(indices[i], j))
}
