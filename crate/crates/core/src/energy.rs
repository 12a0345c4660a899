//! Reconstruction energy `|x - f(x)|^2` over the input plane.

use faer::{Mat, MatRef};
use serde::{Deserialize, Serialize};

use crate::autoencoder::AutoEncoderParams;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    /// Nodes per axis, endpoints included.
    pub steps: usize,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.steps < 2 {
            return Err(Error::usage(format!("grid needs at least 2 steps per axis, got {}", self.steps)));
        }
        let ok = [self.x_min, self.x_max, self.y_min, self.y_max]
            .iter()
            .all(|v| v.is_finite());
        if !ok || !(self.x_max > self.x_min) || !(self.y_max > self.y_min) {
            return Err(Error::usage("grid bounds must be finite with min < max"));
        }
        Ok(())
    }

    /// Grid nodes, `y` outer and `x` inner, as an `steps^2 x 2` matrix.
    pub fn nodes(&self) -> Mat<f64> {
        let s = self.steps;
        let at = |lo: f64, hi: f64, k: usize| lo + (hi - lo) * k as f64 / (s - 1) as f64;
        Mat::from_fn(s * s, 2, |r, c| {
            if c == 0 {
                at(self.x_min, self.x_max, r % s)
            } else {
                at(self.y_min, self.y_max, r / s)
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyNode {
    pub x: f64,
    pub y: f64,
    pub energy: f64,
}

/// Per-row `|x_i - f(x_i)|^2`.
pub fn reconstruction_energy(params: &AutoEncoderParams, x: MatRef<'_, f64>) -> Result<Vec<f64>> {
    let xhat = params.reconstruct(x)?;
    Ok((0..x.nrows())
        .map(|i| {
            (0..x.ncols())
                .map(|j| {
                    let r = x.read(i, j) - xhat.read(i, j);
                    r * r
                })
                .sum()
        })
        .collect())
}

pub fn mean_energy(params: &AutoEncoderParams, x: MatRef<'_, f64>) -> Result<f64> {
    let e = reconstruction_energy(params, x)?;
    Ok(e.iter().sum::<f64>() / e.len() as f64)
}

/// Energy at every grid node, row-major with `x` varying fastest.
pub fn energy_landscape(params: &AutoEncoderParams, grid: &GridSpec) -> Result<Vec<EnergyNode>> {
    if params.input_dim() != 2 {
        return Err(Error::usage(format!(
            "energy maps need a 2-dimensional model, got d={}",
            params.input_dim()
        )));
    }
    grid.validate()?;
    let nodes = grid.nodes();
    let energy = reconstruction_energy(params, nodes.as_ref())?;
    Ok(energy
        .into_iter()
        .enumerate()
        .map(|(i, e)| EnergyNode {
            x: nodes.read(i, 0),
            y: nodes.read(i, 1),
            energy: e,
        })
        .collect())
}
