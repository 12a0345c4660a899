use std::fmt;
use std::str::FromStr;

use faer::{Mat, MatRef};
use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Encoder nonlinearity `g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Linear,
    Relu,
    Logsig,
    /// `max(0, z) - max(0, z - 1)`
    Satlu,
    /// `ln(1 + e^z)`
    Softplus,
}

impl Activation {
    pub const ALL: [Activation; 5] = [
        Activation::Linear,
        Activation::Relu,
        Activation::Logsig,
        Activation::Satlu,
        Activation::Softplus,
    ];

    /// `(g(z), g'(z))`. Kinks take the zero subgradient.
    pub fn eval(self, z: f64) -> (f64, f64) {
        match self {
            Activation::Linear => (z, 1.0),
            Activation::Relu => {
                if z > 0.0 {
                    (z, 1.0)
                } else {
                    (0.0, 0.0)
                }
            }
            Activation::Logsig => {
                let s = logistic(z);
                (s, s * (1.0 - s))
            }
            Activation::Satlu => {
                let v = z.max(0.0) - (z - 1.0).max(0.0);
                let dv = if z > 0.0 && z < 1.0 { 1.0 } else { 0.0 };
                (v, dv)
            }
            Activation::Softplus => {
                let v = if z > 0.0 {
                    z + (-z).exp().ln_1p()
                } else {
                    z.exp().ln_1p()
                };
                (v, logistic(z))
            }
        }
    }

    /// Elementwise `(g(Z), g'(Z))`.
    pub fn apply(self, z: MatRef<'_, f64>) -> (Mat<f64>, Mat<f64>) {
        let mut out = Mat::zeros(z.nrows(), z.ncols());
        let mut deriv = Mat::zeros(z.nrows(), z.ncols());
        for j in 0..z.ncols() {
            for i in 0..z.nrows() {
                let (v, dv) = self.eval(z.read(i, j));
                out.write(i, j, v);
                deriv.write(i, j, dv);
            }
        }
        (out, deriv)
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Linear => "linear",
            Activation::Relu => "relu",
            Activation::Logsig => "logsig",
            Activation::Satlu => "satlu",
            Activation::Softplus => "softplus",
        }
    }
}

fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Activation::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                Error::usage(format!(
                    "unknown activation '{s}' (expected linear, relu, logsig, satlu or softplus)"
                ))
            })
    }
}
