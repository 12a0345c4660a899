//! Data sources and file emitters.

pub mod csv;
pub mod mnist;
pub mod pgm;
pub mod synthetic;

use faer::{Mat, MatRef};

pub use synthetic::{sample_gaussian, sample_gmm, GaussianSpec, MixtureSpec};

/// Subtracts the column means; returns the centered matrix and the means.
pub fn center_columns(x: MatRef<'_, f64>) -> (Mat<f64>, Vec<f64>) {
    let n = x.nrows().max(1) as f64;
    let means: Vec<f64> = (0..x.ncols())
        .map(|j| (0..x.nrows()).map(|i| x.read(i, j)).sum::<f64>() / n)
        .collect();
    let centered = Mat::from_fn(x.nrows(), x.ncols(), |i, j| x.read(i, j) - means[j]);
    (centered, means)
}
