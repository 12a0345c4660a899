//! Seeded Gaussian and Gaussian-mixture sources.

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{streams, RandomStream};

const PSD_TOL: f64 = 1e-10;

/// Lower-triangular factor `L` with `L L^T = cov`, tolerating singular PSD input.
pub fn cholesky_psd(cov: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let d = cov.len();
    if cov.iter().any(|r| r.len() != d) {
        return Err(Error::usage("covariance must be square"));
    }
    for i in 0..d {
        for j in 0..d {
            if !cov[i][j].is_finite() {
                return Err(Error::usage("covariance has non-finite entries"));
            }
            if (cov[i][j] - cov[j][i]).abs() > PSD_TOL {
                return Err(Error::usage(format!("covariance not symmetric at ({i},{j})")));
            }
        }
    }
    let mut l = vec![vec![0.0; d]; d];
    for j in 0..d {
        let pivot = cov[j][j] - (0..j).map(|k| l[j][k] * l[j][k]).sum::<f64>();
        if pivot < -PSD_TOL {
            return Err(Error::usage(format!(
                "covariance is not positive semidefinite (pivot {pivot:e} at {j})"
            )));
        }
        if pivot <= PSD_TOL {
            // Degenerate direction: the remaining entries of this column must vanish.
            for i in (j + 1)..d {
                let r = cov[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
                if r.abs() > 1e-8 {
                    return Err(Error::usage("covariance is not positive semidefinite"));
                }
            }
            continue;
        }
        let diag = pivot.sqrt();
        l[j][j] = diag;
        for i in (j + 1)..d {
            let r = cov[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
            l[i][j] = r / diag;
        }
    }
    Ok(l)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpec {
    pub mean: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
}

impl GaussianSpec {
    pub fn new(mean: Vec<f64>, covariance: Vec<Vec<f64>>) -> Result<Self> {
        let spec = Self { mean, covariance };
        spec.factor()?;
        Ok(spec)
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    fn factor(&self) -> Result<Vec<Vec<f64>>> {
        if self.mean.is_empty() {
            return Err(Error::usage("Gaussian mean must have dimension >= 1"));
        }
        if self.covariance.len() != self.mean.len() {
            return Err(Error::usage(format!(
                "mean has dimension {} but covariance is {}x{}",
                self.mean.len(),
                self.covariance.len(),
                self.covariance.len()
            )));
        }
        cholesky_psd(&self.covariance)
    }

    /// Zero mean, unit variances, correlation 0.95.
    pub fn correlated_2d() -> Self {
        Self {
            mean: vec![0.0, 0.0],
            covariance: vec![vec![1.0, 0.95], vec![0.95, 1.0]],
        }
    }
}

fn draw(rng: &mut RandomStream, mean: &[f64], l: &[Vec<f64>], out: &mut [f64]) {
    let z: Vec<f64> = (0..mean.len()).map(|_| rng.normal()).collect();
    for i in 0..mean.len() {
        out[i] = mean[i] + (0..=i).map(|k| l[i][k] * z[k]).sum::<f64>();
    }
}

/// `n` rows of `mean + L z` with `z` standard normal.
pub fn sample_gaussian(spec: &GaussianSpec, n: usize, seed: u64) -> Result<Mat<f64>> {
    let l = spec.factor()?;
    let d = spec.dim();
    let mut rng = RandomStream::new(seed, streams::DATA);
    let mut out = Mat::zeros(n, d);
    let mut row = vec![0.0; d];
    for i in 0..n {
        draw(&mut rng, &spec.mean, &l, &mut row);
        for j in 0..d {
            out.write(i, j, row[j]);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureSpec {
    pub components: Vec<GaussianSpec>,
    pub weights: Vec<f64>,
}

impl MixtureSpec {
    pub fn new(components: Vec<GaussianSpec>, weights: Vec<f64>) -> Result<Self> {
        let spec = Self {
            components,
            weights,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.components.is_empty() || self.components.len() != self.weights.len() {
            return Err(Error::usage("mixture needs one weight per component"));
        }
        if self.weights.iter().any(|&w| !(w >= 0.0)) {
            return Err(Error::usage("mixture weights must be >= 0"));
        }
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::usage(format!("mixture weights sum to {total}, expected 1")));
        }
        let d = self.components[0].dim();
        for c in &self.components {
            if c.dim() != d {
                return Err(Error::usage("mixture components differ in dimension"));
            }
            c.factor()?;
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.components[0].dim()
    }

    /// Three correlated components: means (2,-2), (-2,-2), (6,-2), weights 0.5/0.25/0.25,
    /// first component anti-correlated (-0.95), the others correlated (+0.95).
    pub fn three_component_2d() -> Self {
        let anti = vec![vec![1.0, -0.95], vec![-0.95, 1.0]];
        let pos = vec![vec![1.0, 0.95], vec![0.95, 1.0]];
        Self {
            components: vec![
                GaussianSpec { mean: vec![2.0, -2.0], covariance: anti },
                GaussianSpec { mean: vec![-2.0, -2.0], covariance: pos.clone() },
                GaussianSpec { mean: vec![6.0, -2.0], covariance: pos },
            ],
            weights: vec![0.5, 0.25, 0.25],
        }
    }

    /// Three isotropic blobs (sd 0.1) on an equilateral triangle with side 10.
    pub fn separated_blobs() -> Self {
        let cov = vec![vec![0.01, 0.0], vec![0.0, 0.01]];
        let centers = [[0.0, 0.0], [10.0, 0.0], [5.0, 75f64.sqrt()]];
        Self {
            components: centers
                .iter()
                .map(|c| GaussianSpec { mean: c.to_vec(), covariance: cov.clone() })
                .collect(),
            weights: vec![1.0 / 3.0, 1.0 / 3.0, 1.0 - 2.0 / 3.0],
        }
    }
}

/// Samples with their component labels. Labels and normals use separate
/// streams, so a one-component mixture reproduces [`sample_gaussian`].
pub fn sample_gmm_labeled(spec: &MixtureSpec, n: usize, seed: u64) -> Result<(Mat<f64>, Vec<usize>)> {
    spec.validate()?;
    let factors = spec
        .components
        .iter()
        .map(GaussianSpec::factor)
        .collect::<Result<Vec<_>>>()?;
    let d = spec.dim();
    let mut normals = RandomStream::new(seed, streams::DATA);
    let mut picks = RandomStream::new(seed, streams::MIXTURE_LABELS);
    let mut out = Mat::zeros(n, d);
    let mut labels = Vec::with_capacity(n);
    let mut row = vec![0.0; d];
    for i in 0..n {
        let u = picks.uniform();
        let mut acc = 0.0;
        let mut k = spec.weights.len() - 1;
        for (idx, w) in spec.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                k = idx;
                break;
            }
        }
        draw(&mut normals, &spec.components[k].mean, &factors[k], &mut row);
        for j in 0..d {
            out.write(i, j, row[j]);
        }
        labels.push(k);
    }
    Ok((out, labels))
}

pub fn sample_gmm(spec: &MixtureSpec, n: usize, seed: u64) -> Result<Mat<f64>> {
    Ok(sample_gmm_labeled(spec, n, seed)?.0)
}
