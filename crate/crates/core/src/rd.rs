//! Rate-distortion for parallel Gaussian sources, and PCA.
//!
//! For independent components with variances `g_i`, the optimal allocation
//! is `D_i = min(lambda, g_i)` with the water level chosen so that
//! `sum D_i = D`, and `R(D) = sum_{D_i < g_i} 1/2 log2(g_i / D_i)` bits.

use faer::{Mat, MatRef};

use crate::error::{Error, Result};
use crate::linalg::EigenDecomposition;

#[derive(Debug, Clone, PartialEq)]
pub struct WaterfillResult {
    pub rate_bits: f64,
    pub per_component_distortion: Vec<f64>,
    pub water_level: f64,
}

const BISECTION_TOL: f64 = 1e-12;

pub fn waterfill(variances: &[f64], distortion: f64) -> Result<WaterfillResult> {
    if variances.is_empty() {
        return Err(Error::usage("need at least one component variance"));
    }
    if let Some(v) = variances.iter().find(|&&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::usage(format!("component variances must be > 0, got {v}")));
    }
    if !(distortion > 0.0 && distortion.is_finite()) {
        return Err(Error::usage(format!("distortion must be > 0, got {distortion}")));
    }
    let max_var = variances.iter().copied().fold(f64::MIN, f64::max);
    let total: f64 = variances.iter().sum();
    let allocated = |lambda: f64| variances.iter().map(|&v| v.min(lambda)).sum::<f64>();

    let water_level = if distortion >= total {
        max_var
    } else {
        let (mut lo, mut hi) = (0.0, max_var);
        let mut mid = 0.5 * (lo + hi);
        for _ in 0..200 {
            mid = 0.5 * (lo + hi);
            let s = allocated(mid);
            if (s - distortion).abs() < BISECTION_TOL {
                break;
            }
            if s < distortion {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        mid
    };
    let per_component_distortion: Vec<f64> = variances.iter().map(|&v| v.min(water_level)).collect();
    let rate_bits = variances
        .iter()
        .zip(&per_component_distortion)
        .filter(|(v, d)| d < v)
        .map(|(v, d)| 0.5 * (v / d).log2())
        .fold(0.0, |acc, r| acc + r);
    Ok(WaterfillResult {
        rate_bits,
        per_component_distortion,
        water_level,
    })
}

/// One row of a rate-distortion curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RdPoint {
    pub distortion: f64,
    pub rate_bits: f64,
    pub water_level: f64,
}

/// `steps` evenly spaced distortions from `lo` to `hi` inclusive.
pub fn rd_curve(variances: &[f64], lo: f64, hi: f64, steps: usize) -> Result<Vec<RdPoint>> {
    if steps < 2 || !(lo > 0.0) || !(hi > lo) {
        return Err(Error::usage(format!(
            "distortion grid needs 0 < lo < hi and steps >= 2 (got {lo}, {hi}, {steps})"
        )));
    }
    (0..steps)
        .map(|i| {
            let d = lo + (hi - lo) * i as f64 / (steps - 1) as f64;
            let r = waterfill(variances, d)?;
            Ok(RdPoint {
                distortion: d,
                rate_bits: r.rate_bits,
                water_level: r.water_level,
            })
        })
        .collect()
}

/// Principal directions of the sample covariance.
#[derive(Debug, Clone)]
pub struct PcaBasis {
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal directions as columns.
    pub directions: Mat<f64>,
    pub mean: Vec<f64>,
    /// Set when `N <= d`; the covariance is then rank deficient.
    pub degenerate: bool,
}

pub fn pca(x: MatRef<'_, f64>) -> Result<PcaBasis> {
    let (n, d) = (x.nrows(), x.ncols());
    if n < 2 || d == 0 {
        return Err(Error::usage(format!("PCA needs at least 2 samples, got {n}")));
    }
    let (centered, mean) = crate::data::center_columns(x);
    let scale = 1.0 / (n - 1) as f64;
    let cov = centered.transpose() * &centered;
    let cov = Mat::from_fn(d, d, |i, j| scale * cov.read(i, j));
    let evd = EigenDecomposition::new(cov.as_ref())?;
    Ok(PcaBasis {
        eigenvalues: evd.eigenvalues,
        directions: evd.eigenvectors,
        mean,
        degenerate: n <= d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synthetic::{sample_gaussian, GaussianSpec};

    #[test]
    fn two_component_examples() {
        let r = waterfill(&[4.0, 1.0], 1.0).unwrap();
        assert!((r.water_level - 0.5).abs() < 1e-12);
        assert!((r.rate_bits - 2.0).abs() < 1e-9);
        for d in &r.per_component_distortion {
            assert!((d - 0.5).abs() < 1e-12);
        }
        let r = waterfill(&[4.0, 1.0], 3.0).unwrap();
        assert!((r.water_level - 2.0).abs() < 1e-12);
        assert!((r.rate_bits - 0.5).abs() < 1e-9);
        assert_eq!(r.per_component_distortion[1], 1.0);
        let r = waterfill(&[4.0, 1.0], 5.0).unwrap();
        assert_eq!(r.rate_bits.to_bits(), 0.0f64.to_bits());
        assert_eq!(r.per_component_distortion, vec![4.0, 1.0]);
        assert_eq!(waterfill(&[4.0, 1.0], 9.0).unwrap().rate_bits, 0.0);
    }

    #[test]
    fn usage_errors() {
        assert!(waterfill(&[1.0], 0.0).is_err());
        assert!(waterfill(&[1.0, -1.0], 1.0).is_err());
        assert!(waterfill(&[], 1.0).is_err());
        assert!(rd_curve(&[1.0], 1.0, 0.5, 10).is_err());
    }

    #[test]
    fn allocation_sums_to_target_and_dropped_components_cost_nothing() {
        let vars = [5.0, 2.0, 0.7, 0.1];
        for &d in &[0.05, 0.3, 1.0, 2.5, 7.0] {
            let r = waterfill(&vars, d).unwrap();
            let s: f64 = r.per_component_distortion.iter().sum();
            assert!((s - d).abs() < 1e-9);
            let active: f64 = vars
                .iter()
                .filter(|&&v| v > r.water_level)
                .map(|&v| 0.5 * (v / r.water_level).log2())
                .sum();
            assert!((active - r.rate_bits).abs() < 1e-9);
        }
    }

    #[test]
    fn single_component_formula() {
        for &d in &[0.1, 1.0, 2.0, 3.5] {
            let r = waterfill(&[2.0], d).unwrap();
            let want = (0.5 * (2.0f64 / d).log2()).max(0.0);
            assert!((r.rate_bits - want).abs() < 1e-9);
        }
    }

    #[test]
    fn curve_is_monotone_and_convex() {
        let curve = rd_curve(&[4.0, 1.0, 0.25], 0.05, 6.0, 50).unwrap();
        for w in curve.windows(2) {
            assert!(w[1].rate_bits <= w[0].rate_bits + 1e-12);
        }
        for w in curve.windows(3) {
            assert!(w[1].rate_bits <= 0.5 * (w[0].rate_bits + w[2].rate_bits) + 1e-9);
        }
    }

    #[test]
    fn pca_of_correlated_gaussian() {
        let x = sample_gaussian(&GaussianSpec::correlated_2d(), 20_000, 3).unwrap();
        let basis = pca(x.as_ref()).unwrap();
        assert!((basis.eigenvalues[0] - 1.95).abs() < 0.05);
        assert!((basis.eigenvalues[1] - 0.05).abs() < 0.01);
        let v = (basis.directions.read(0, 0), basis.directions.read(1, 0));
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((v.0 * s + v.1 * s).abs() > 0.999);
        let dot = basis.directions.read(0, 0) * basis.directions.read(0, 1)
            + basis.directions.read(1, 0) * basis.directions.read(1, 1);
        assert!(dot.abs() < 1e-9);
    }

    #[test]
    fn pca_isotropic_and_rank_one() {
        let iso = GaussianSpec::new(vec![0.0; 3], vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
        let x = sample_gaussian(&iso, 20_000, 8).unwrap();
        let b = pca(x.as_ref()).unwrap();
        assert!(b.eigenvalues[0] / b.eigenvalues[2] < 1.1);
        let line = Mat::from_fn(10, 2, |i, j| i as f64 * [1.0, 2.0][j]);
        let b = pca(line.as_ref()).unwrap();
        assert!(b.eigenvalues[1].abs() < 1e-10);
        assert!(!b.degenerate);
        assert!(pca(Mat::<f64>::zeros(2, 3).as_ref()).unwrap().degenerate);
    }
}
