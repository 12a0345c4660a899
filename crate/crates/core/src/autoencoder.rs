//! Single-hidden-layer auto-encoder and its rate-distortion Lagrangian.
//!
//! Encoder `z = g(W x + c)`, decoder `xhat = A z + b`, with no tying between
//! `W` and `A`. Row-stacked over a batch: `Z = X W^T + 1 c^T`, `Zhat = g(Z)`,
//! `G' = g'(Z)`, `Xhat = Zhat A^T + 1 b^T`.
//!
//! The objective ascended during training is
//! `S_a(N K_X o K_Xhat) - S_a(K_Xhat) - mu D_emp`.
//! Because the Gaussian kernel only sees pairwise differences, the output
//! Gram matrix is built from `Zhat A^T` and never depends on `b`.

use faer::{Mat, MatRef};

use crate::activation::Activation;
use crate::entropy::{self, EntropySpec};
use crate::error::{Error, Result};
use crate::gram::{normalized_gram, NormalizedGram};
use crate::linalg;
use crate::rng::{streams, RandomStream};

#[derive(Debug, Clone, PartialEq)]
pub struct AutoEncoderParams {
    /// Encoder weights, `p x d`.
    pub w: Mat<f64>,
    /// Encoder bias, length `p`.
    pub c: Vec<f64>,
    /// Decoder weights, `d x p`.
    pub a: Mat<f64>,
    /// Decoder bias, length `d`.
    pub b: Vec<f64>,
    pub activation: Activation,
}

impl AutoEncoderParams {
    pub fn new(
        w: Mat<f64>,
        c: Vec<f64>,
        a: Mat<f64>,
        b: Vec<f64>,
        activation: Activation,
    ) -> Result<Self> {
        let params = Self {
            w,
            c,
            a,
            b,
            activation,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn zeros(d: usize, p: usize, activation: Activation) -> Self {
        Self {
            w: Mat::zeros(p, d),
            c: vec![0.0; p],
            a: Mat::zeros(d, p),
            b: vec![0.0; d],
            activation,
        }
    }

    /// Weights uniform on `(-r, r)` with `r = sqrt(6 / (fan_in + fan_out))`, zero biases.
    pub fn init_uniform(d: usize, p: usize, activation: Activation, seed: u64) -> Self {
        let mut rng = RandomStream::new(seed, streams::INIT);
        let r = (6.0 / (d + p) as f64).sqrt();
        let w = Mat::from_fn(p, d, |_, _| rng.uniform_range(-r, r));
        let a = Mat::from_fn(d, p, |_, _| rng.uniform_range(-r, r));
        Self {
            w,
            c: vec![0.0; p],
            a,
            b: vec![0.0; d],
            activation,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.w.ncols()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w.nrows()
    }

    pub fn validate(&self) -> Result<()> {
        let (p, d) = (self.w.nrows(), self.w.ncols());
        if p == 0 || d == 0 {
            return Err(Error::usage("encoder must have at least one unit and one input"));
        }
        if self.c.len() != p || self.a.nrows() != d || self.a.ncols() != p || self.b.len() != d {
            return Err(Error::usage(format!(
                "inconsistent parameter shapes: W {}x{}, c {}, A {}x{}, b {}",
                p,
                d,
                self.c.len(),
                self.a.nrows(),
                self.a.ncols(),
                self.b.len()
            )));
        }
        let finite = linalg::all_finite(self.w.as_ref())
            && linalg::all_finite(self.a.as_ref())
            && self.c.iter().chain(&self.b).all(|v| v.is_finite());
        if !finite {
            return Err(Error::usage("parameters contain non-finite values"));
        }
        Ok(())
    }

    /// `self + step * grads`.
    pub fn ascend(&self, grads: &ParamGrads, step: f64) -> Self {
        let (p, d) = (self.hidden_dim(), self.input_dim());
        Self {
            w: Mat::from_fn(p, d, |i, j| self.w.read(i, j) + step * grads.dw.read(i, j)),
            c: self.c.iter().zip(&grads.dc).map(|(v, g)| v + step * g).collect(),
            a: Mat::from_fn(d, p, |i, j| self.a.read(i, j) + step * grads.da.read(i, j)),
            b: self.b.iter().zip(&grads.db).map(|(v, g)| v + step * g).collect(),
            activation: self.activation,
        }
    }

    /// Frobenius norms of `(W, c, A, b)`.
    pub fn norms(&self) -> [f64; 4] {
        [
            linalg::frobenius_norm(self.w.as_ref()),
            vec_norm(&self.c),
            linalg::frobenius_norm(self.a.as_ref()),
            vec_norm(&self.b),
        ]
    }

    fn check_input(&self, x: MatRef<'_, f64>) -> Result<()> {
        if x.ncols() != self.input_dim() {
            return Err(Error::usage(format!(
                "input has {} columns but the encoder expects {}",
                x.ncols(),
                self.input_dim()
            )));
        }
        if x.nrows() == 0 {
            return Err(Error::usage("empty input"));
        }
        Ok(())
    }

    /// Reconstructions `f(x)` for the rows of `x`.
    pub fn reconstruct(&self, x: MatRef<'_, f64>) -> Result<Mat<f64>> {
        Ok(forward(x, self)?.xhat)
    }
}

fn vec_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Cached activations of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardPass {
    /// Pre-activations `X W^T + 1 c^T`, `N x p`.
    pub z: Mat<f64>,
    pub zhat: Mat<f64>,
    pub gprime: Mat<f64>,
    /// Reconstructions `Zhat A^T + 1 b^T`, `N x d`.
    pub xhat: Mat<f64>,
}

impl ForwardPass {
    /// `Zhat A^T`: reconstructions without the decoder bias.
    fn decoded_without_bias(&self, params: &AutoEncoderParams) -> Mat<f64> {
        &self.zhat * params.a.transpose()
    }
}

pub fn forward(x: MatRef<'_, f64>, params: &AutoEncoderParams) -> Result<ForwardPass> {
    params.check_input(x)?;
    let n = x.nrows();
    let mut z = x * params.w.transpose();
    for j in 0..params.hidden_dim() {
        for i in 0..n {
            z.write(i, j, z.read(i, j) + params.c[j]);
        }
    }
    let (zhat, gprime) = params.activation.apply(z.as_ref());
    let mut xhat = &zhat * params.a.transpose();
    for j in 0..params.input_dim() {
        for i in 0..n {
            xhat.write(i, j, xhat.read(i, j) + params.b[j]);
        }
    }
    Ok(ForwardPass {
        z,
        zhat,
        gprime,
        xhat,
    })
}

/// `(1/N) sum_i |x_i - xhat_i|^2`.
pub fn empirical_distortion(x: MatRef<'_, f64>, xhat: MatRef<'_, f64>) -> Result<f64> {
    linalg::ensure_same_shape(x, xhat, "distortion")?;
    if x.nrows() == 0 {
        return Err(Error::usage("distortion of an empty batch"));
    }
    let mut acc = 0.0;
    for i in 0..x.nrows() {
        for j in 0..x.ncols() {
            let r = x.read(i, j) - xhat.read(i, j);
            acc += r * r;
        }
    }
    Ok(acc / x.nrows() as f64)
}

/// Gradients with respect to `(W, c, A, b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrads {
    pub dw: Mat<f64>,
    pub dc: Vec<f64>,
    pub da: Mat<f64>,
    pub db: Vec<f64>,
}

impl ParamGrads {
    pub fn zeros(d: usize, p: usize) -> Self {
        Self {
            dw: Mat::zeros(p, d),
            dc: vec![0.0; p],
            da: Mat::zeros(d, p),
            db: vec![0.0; d],
        }
    }

    /// `self + k * other`.
    pub fn add_scaled(&self, other: &ParamGrads, k: f64) -> Self {
        let comb = |a: MatRef<'_, f64>, b: MatRef<'_, f64>| {
            Mat::from_fn(a.nrows(), a.ncols(), |i, j| a.read(i, j) + k * b.read(i, j))
        };
        Self {
            dw: comb(self.dw.as_ref(), other.dw.as_ref()),
            dc: self.dc.iter().zip(&other.dc).map(|(a, b)| a + k * b).collect(),
            da: comb(self.da.as_ref(), other.da.as_ref()),
            db: self.db.iter().zip(&other.db).map(|(a, b)| a + k * b).collect(),
        }
    }

    pub fn scaled(&self, k: f64) -> Self {
        ParamGrads::zeros(self.db.len(), self.dc.len()).add_scaled(self, k)
    }

    /// All entries flattened in block order `W, c, A, b` (matrices row-major).
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        out.extend(linalg::to_rows(self.dw.as_ref()).into_iter().flatten());
        out.extend(&self.dc);
        out.extend(linalg::to_rows(self.da.as_ref()).into_iter().flatten());
        out.extend(&self.db);
        out
    }

    pub fn is_finite(&self) -> bool {
        self.flatten().iter().all(|v| v.is_finite())
    }

    pub fn norm(&self) -> f64 {
        vec_norm(&self.flatten())
    }
}

/// Gradients of `D_emp` when the encoder sees `input` and the target is `target`.
///
/// With `input == target` this is the plain distortion gradient; the de-noising
/// baseline feeds a corrupted input against the clean target.
pub fn distortion_gradients_with_target(
    input: MatRef<'_, f64>,
    target: MatRef<'_, f64>,
    params: &AutoEncoderParams,
    fp: &ForwardPass,
) -> Result<ParamGrads> {
    params.check_input(input)?;
    linalg::ensure_same_shape(input, target, "distortion gradient target")?;
    linalg::ensure_same_shape(target, fp.xhat.as_ref(), "distortion gradient reconstruction")?;
    let n = input.nrows();
    let k = -2.0 / n as f64;
    let resid = Mat::from_fn(n, target.ncols(), |i, j| target.read(i, j) - fp.xhat.read(i, j));
    let da = resid.transpose() * &fp.zhat;
    let back = &resid * &params.a;
    let e = Mat::from_fn(n, params.hidden_dim(), |i, j| back.read(i, j) * fp.gprime.read(i, j));
    let dw = e.transpose() * input;
    Ok(ParamGrads {
        dw: Mat::from_fn(dw.nrows(), dw.ncols(), |i, j| k * dw.read(i, j)),
        dc: linalg::column_sums(e.as_ref()).into_iter().map(|v| k * v).collect(),
        da: Mat::from_fn(da.nrows(), da.ncols(), |i, j| k * da.read(i, j)),
        db: linalg::column_sums(resid.as_ref()).into_iter().map(|v| k * v).collect(),
    })
}

/// Gradients of `D_emp(X, f(X))`.
pub fn distortion_gradients(
    x: MatRef<'_, f64>,
    params: &AutoEncoderParams,
    fp: &ForwardPass,
) -> Result<ParamGrads> {
    distortion_gradients_with_target(x, x, params, fp)
}

/// Affinity `M = dS/dK o K / (2 sigma^2)` and its graph Laplacian `diag(M 1) - M`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianWeights {
    pub m: Mat<f64>,
    pub l: Mat<f64>,
}

pub fn laplacian_weights(
    ds_dk: MatRef<'_, f64>,
    k_hat: &NormalizedGram,
    sigma_hat: f64,
) -> Result<LaplacianWeights> {
    linalg::ensure_same_shape(ds_dk, k_hat.as_ref(), "Laplacian weights")?;
    if !(sigma_hat > 0.0) {
        return Err(Error::usage(format!("output bandwidth must be > 0, got {sigma_hat}")));
    }
    let scale = 1.0 / (2.0 * sigma_hat * sigma_hat);
    let k = k_hat.as_ref();
    let n = k.nrows();
    let m = Mat::from_fn(n, n, |i, j| ds_dk.read(i, j) * scale * k.read(i, j));
    let degree = linalg::row_sums(m.as_ref());
    let l = Mat::from_fn(n, n, |i, j| {
        if i == j {
            degree[i] - m.read(i, i)
        } else {
            -m.read(i, j)
        }
    });
    Ok(LaplacianWeights { m, l })
}

/// Parameter gradients of an output-Gram entropy term, given the Laplacian of
/// its matrix-level gradient.
///
/// `dA = -4 A (Zhat^T L Zhat)`, `dW = -4 ((A^T A Zhat^T L) o G'^T) X`,
/// `dc = -4 ((A^T A Zhat^T L) o G'^T) 1`, and `db = 0`.
pub fn entropy_parameter_gradients(
    x: MatRef<'_, f64>,
    params: &AutoEncoderParams,
    fp: &ForwardPass,
    lap: &LaplacianWeights,
) -> Result<ParamGrads> {
    params.check_input(x)?;
    let n = x.nrows();
    if lap.l.nrows() != n || lap.l.ncols() != n || fp.zhat.nrows() != n {
        return Err(Error::usage(format!(
            "Laplacian is {}x{} but the batch has {n} rows",
            lap.l.nrows(),
            lap.l.ncols()
        )));
    }
    let zt_l = fp.zhat.transpose() * &lap.l; // p x N
    let inner = &zt_l * &fp.zhat; // p x p
    let da = &params.a * &inner;
    let ata = params.a.transpose() * &params.a;
    let back = &ata * &zt_l; // p x N
    let f = Mat::from_fn(back.nrows(), n, |i, j| back.read(i, j) * fp.gprime.read(j, i));
    let dw = &f * x;
    let dc = linalg::row_sums(f.as_ref());
    Ok(ParamGrads {
        dw: Mat::from_fn(dw.nrows(), dw.ncols(), |i, j| -4.0 * dw.read(i, j)),
        dc: dc.into_iter().map(|v| -4.0 * v).collect(),
        da: Mat::from_fn(da.nrows(), da.ncols(), |i, j| -4.0 * da.read(i, j)),
        db: vec![0.0; params.input_dim()],
    })
}

/// Trade-off and kernel settings of the rate-distortion Lagrangian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Objective {
    pub mu: f64,
    pub entropy: EntropySpec,
    pub sigma_x: f64,
    pub sigma_xhat: f64,
}

impl Objective {
    /// `sigma = 0.2 sqrt(2)`, used for every synthetic experiment.
    pub const SYNTHETIC_SIGMA: f64 = 0.282_842_712_474_619;

    pub fn new(mu: f64, entropy: EntropySpec, sigma_x: f64, sigma_xhat: f64) -> Result<Self> {
        if !(mu >= 0.0 && mu.is_finite()) {
            return Err(Error::usage(format!("mu must be >= 0, got {mu}")));
        }
        for (name, s) in [("sigma_x", sigma_x), ("sigma_xhat", sigma_xhat)] {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::usage(format!("{name} must be > 0, got {s}")));
            }
        }
        Ok(Self {
            mu,
            entropy,
            sigma_x,
            sigma_xhat,
        })
    }
}

/// Value of the Lagrangian and its parts, all in bits except the distortion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagrangianTerms {
    pub value: f64,
    /// `S_a(N K_X o K_Xhat)`
    pub joint_entropy: f64,
    /// `S_a(K_Xhat)`
    pub marginal_entropy: f64,
    pub distortion: f64,
}

impl LagrangianTerms {
    fn new(joint: f64, marginal: f64, distortion: f64, mu: f64) -> Self {
        Self {
            value: joint - marginal - mu * distortion,
            joint_entropy: joint,
            marginal_entropy: marginal,
            distortion,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.joint_entropy.is_finite()
            && self.marginal_entropy.is_finite()
            && self.distortion.is_finite()
    }
}

pub fn lagrangian(
    x: MatRef<'_, f64>,
    params: &AutoEncoderParams,
    obj: &Objective,
) -> Result<LagrangianTerms> {
    let kx = normalized_gram(x, obj.sigma_x)?;
    lagrangian_with_input_gram(x, &kx, params, obj)
}

/// [`lagrangian`] with a precomputed input Gram matrix `K_X`.
pub fn lagrangian_with_input_gram(
    x: MatRef<'_, f64>,
    kx: &NormalizedGram,
    params: &AutoEncoderParams,
    obj: &Objective,
) -> Result<LagrangianTerms> {
    let fp = forward(x, params)?;
    let khat = normalized_gram(fp.decoded_without_bias(params).as_ref(), obj.sigma_xhat)?;
    let joint_gram = crate::gram::scaled_hadamard(kx.as_ref(), khat.as_ref())?;
    let joint = entropy::renyi_entropy(joint_gram.as_ref(), obj.entropy)?;
    let marginal = entropy::renyi_entropy(khat.as_ref(), obj.entropy)?;
    let distortion = empirical_distortion(x, fp.xhat.as_ref())?;
    Ok(LagrangianTerms::new(joint, marginal, distortion, obj.mu))
}

pub fn lagrangian_gradients(
    x: MatRef<'_, f64>,
    params: &AutoEncoderParams,
    obj: &Objective,
) -> Result<(LagrangianTerms, ParamGrads)> {
    let kx = normalized_gram(x, obj.sigma_x)?;
    lagrangian_gradients_with_input_gram(x, &kx, params, obj)
}

/// Lagrangian value and gradient
/// `E(L_Q) - E(L_P) - mu dD`, where `E` is [`entropy_parameter_gradients`],
/// `P` comes from the marginal entropy gradient and `Q` from the joint one.
pub fn lagrangian_gradients_with_input_gram(
    x: MatRef<'_, f64>,
    kx: &NormalizedGram,
    params: &AutoEncoderParams,
    obj: &Objective,
) -> Result<(LagrangianTerms, ParamGrads)> {
    let fp = forward(x, params)?;
    let khat = normalized_gram(fp.decoded_without_bias(params).as_ref(), obj.sigma_xhat)?;
    let (marginal, grad_p) = entropy::entropy_and_gradient(khat.as_ref(), obj.entropy)?;
    let (joint, grad_q) =
        entropy::joint_entropy_and_gradient(kx.as_ref(), khat.as_ref(), obj.entropy)?;
    let lap_p = laplacian_weights(grad_p.as_ref(), &khat, obj.sigma_xhat)?;
    let lap_q = laplacian_weights(grad_q.as_ref(), &khat, obj.sigma_xhat)?;
    let g_joint = entropy_parameter_gradients(x, params, &fp, &lap_q)?;
    let g_marginal = entropy_parameter_gradients(x, params, &fp, &lap_p)?;
    let g_dist = distortion_gradients(x, params, &fp)?;
    let distortion = empirical_distortion(x, fp.xhat.as_ref())?;
    let grads = g_joint
        .add_scaled(&g_marginal, -1.0)
        .add_scaled(&g_dist, -obj.mu);
    Ok((LagrangianTerms::new(joint, marginal, distortion, obj.mu), grads))
}

/// Output Gram matrix `K_Xhat` of a batch.
pub fn output_gram(
    x: MatRef<'_, f64>,
    params: &AutoEncoderParams,
    sigma_xhat: f64,
) -> Result<NormalizedGram> {
    let fp = forward(x, params)?;
    normalized_gram(fp.decoded_without_bias(params).as_ref(), sigma_xhat)
}
