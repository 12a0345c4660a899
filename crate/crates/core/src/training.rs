//! Gradient-ascent training with per-epoch backtracking.
//!
//! Every epoch sweeps the batches once, ascending each batch's objective.
//! The full-set objective is then re-evaluated; if it went down, the epoch is
//! undone, the step halved, and the epoch retried (at most
//! [`MAX_HALVINGS`] times, after which the epoch is skipped). Halvings carry
//! over to later epochs.

use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use faer::{Mat, MatRef};

use crate::autoencoder::{
    distortion_gradients_with_target, empirical_distortion, forward,
    lagrangian_gradients_with_input_gram, lagrangian_with_input_gram, AutoEncoderParams,
    LagrangianTerms, Objective, ParamGrads,
};
use crate::entropy::EntropySpec;
use crate::error::{Error, Result};
use crate::gram::{normalized_gram, NormalizedGram};
use crate::kmeans::{precluster_minibatches, BatchPlan};
use crate::linalg::select_rows;
use crate::rng::{streams, RandomStream};

pub const MAX_HALVINGS: usize = 30;

pub const HISTORY_HEADER: &str = "epoch,lagrangian,joint_entropy,marginal_entropy,distortion";

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BatchMode {
    Full,
    /// One batch per k-means cluster.
    Clustered(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ObjectiveKind {
    /// The rate-distortion Lagrangian.
    Rdae,
    /// Distortion only.
    Plain,
    /// Distortion of reconstructions from inputs corrupted with `N(0, s^2 I)`.
    Denoising(f64),
}

impl fmt::Display for BatchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BatchMode::Full => f.write_str("full"),
            BatchMode::Clustered(k) => write!(f, "cluster:{k}"),
        }
    }
}

impl FromStr for BatchMode {
    type Err = Error;

    /// `full` or `cluster:k`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::usage(format!("batch mode must be 'full' or 'cluster:k', got '{s}'"));
        match s.split_once(':') {
            None if s == "full" => Ok(BatchMode::Full),
            Some(("cluster", k)) => {
                let k: usize = k.parse().map_err(|_| bad())?;
                if k == 0 {
                    return Err(Error::usage("cluster count must be >= 1"));
                }
                Ok(BatchMode::Clustered(k))
            }
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObjectiveKind::Rdae => f.write_str("rdae"),
            ObjectiveKind::Plain => f.write_str("plain"),
            ObjectiveKind::Denoising(s) => write!(f, "denoise:{s}"),
        }
    }
}

impl FromStr for ObjectiveKind {
    type Err = Error;

    /// `rdae`, `plain` or `denoise:sigma`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::usage(format!(
                "objective must be 'rdae', 'plain' or 'denoise:sigma', got '{s}'"
            ))
        };
        match s.split_once(':') {
            None if s == "rdae" => Ok(ObjectiveKind::Rdae),
            None if s == "plain" => Ok(ObjectiveKind::Plain),
            Some(("denoise", v)) => {
                let sigma: f64 = v.parse().map_err(|_| bad())?;
                if !(sigma >= 0.0 && sigma.is_finite()) {
                    return Err(Error::usage(format!("noise sigma must be >= 0, got {v}")));
                }
                Ok(ObjectiveKind::Denoising(sigma))
            }
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub mu: f64,
    pub alpha: f64,
    pub sigma_x: f64,
    pub sigma_xhat: f64,
    pub step_size: f64,
    pub epochs: usize,
    pub batch_mode: BatchMode,
    pub seed: u64,
    pub objective: ObjectiveKind,
    pub eig_floor: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            mu: 0.5,
            alpha: EntropySpec::DEFAULT_ALPHA,
            sigma_x: Objective::SYNTHETIC_SIGMA,
            sigma_xhat: Objective::SYNTHETIC_SIGMA,
            step_size: 0.05,
            epochs: 100,
            batch_mode: BatchMode::Full,
            seed: 0,
            objective: ObjectiveKind::Rdae,
            eig_floor: EntropySpec::DEFAULT_EIG_FLOOR,
        }
    }
}

impl TrainConfig {
    /// A zero step is accepted and leaves the parameters untouched.
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size >= 0.0 && self.step_size.is_finite()) {
            return Err(Error::usage(format!("step size must be >= 0, got {}", self.step_size)));
        }
        if self.epochs == 0 {
            return Err(Error::usage("epochs must be >= 1"));
        }
        if self.batch_mode == BatchMode::Clustered(0) {
            return Err(Error::usage("cluster count must be >= 1"));
        }
        if let ObjectiveKind::Denoising(s) = self.objective {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(Error::usage(format!("noise sigma must be >= 0, got {s}")));
            }
        }
        self.lagrangian().map(|_| ())
    }

    pub fn lagrangian(&self) -> Result<Objective> {
        let spec = EntropySpec::new(self.alpha, self.eig_floor)?;
        Objective::new(self.mu, spec, self.sigma_x, self.sigma_xhat)
    }
}

/// Full-set Lagrangian terms before training and after every epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainHistory {
    pub initial: LagrangianTerms,
    pub records: Vec<LagrangianTerms>,
    /// Step size in effect after the last epoch.
    pub final_step: f64,
}

impl TrainHistory {
    pub fn last(&self) -> &LagrangianTerms {
        self.records.last().unwrap_or(&self.initial)
    }

    /// CSV with the initial state as epoch 0.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(HISTORY_HEADER);
        out.push('\n');
        for (epoch, t) in std::iter::once(&self.initial).chain(&self.records).enumerate() {
            let _ = writeln!(
                out,
                "{epoch},{},{},{},{}",
                t.value, t.joint_entropy, t.marginal_entropy, t.distortion
            );
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

struct Batch {
    indices: Vec<usize>,
    x: Mat<f64>,
    kx: Option<NormalizedGram>,
}

struct Trainer<'a> {
    x: MatRef<'a, f64>,
    cfg: TrainConfig,
    obj: Objective,
    kx_full: NormalizedGram,
    batches: Vec<Batch>,
}

fn non_finite(params: &AutoEncoderParams, epoch: usize, batch: usize) -> Error {
    let [w_norm, c_norm, a_norm, b_norm] = params.norms();
    Error::NonFinite {
        epoch,
        batch,
        w_norm,
        c_norm,
        a_norm,
        b_norm,
    }
}

impl Trainer<'_> {
    /// Corrupted copy of every batch input for one epoch.
    fn epoch_noise(&self, epoch: usize) -> Option<Vec<Mat<f64>>> {
        let ObjectiveKind::Denoising(sigma) = self.cfg.objective else {
            return None;
        };
        Some(
            self.batches
                .iter()
                .enumerate()
                .map(|(b, batch)| corrupt(batch.x.as_ref(), sigma, self.cfg.seed, epoch, b))
                .collect(),
        )
    }

    fn batch_gradients(
        &self,
        params: &AutoEncoderParams,
        b: usize,
        noisy: Option<&Mat<f64>>,
    ) -> Result<ParamGrads> {
        let batch = &self.batches[b];
        match (self.cfg.objective, &batch.kx) {
            (ObjectiveKind::Rdae, Some(kx)) => {
                Ok(lagrangian_gradients_with_input_gram(batch.x.as_ref(), kx, params, &self.obj)?.1)
            }
            _ => {
                let input = noisy.unwrap_or(&batch.x);
                let fp = forward(input.as_ref(), params)?;
                let g = distortion_gradients_with_target(input.as_ref(), batch.x.as_ref(), params, &fp)?;
                Ok(g.scaled(-1.0))
            }
        }
    }

    /// Full-set terms recorded in the history.
    fn evaluate(&self, params: &AutoEncoderParams) -> Result<LagrangianTerms> {
        lagrangian_with_input_gram(self.x, &self.kx_full, params, &self.obj)
    }

    /// The quantity the backtracking rule keeps from decreasing.
    fn score(
        &self,
        params: &AutoEncoderParams,
        terms: &LagrangianTerms,
        noise: Option<&[Mat<f64>]>,
    ) -> Result<f64> {
        match (self.cfg.objective, noise) {
            (ObjectiveKind::Rdae, _) => Ok(terms.value),
            (ObjectiveKind::Denoising(_), Some(noise)) => {
                let mut noisy = Mat::<f64>::zeros(self.x.nrows(), self.x.ncols());
                for (batch, m) in self.batches.iter().zip(noise) {
                    for (r, &i) in batch.indices.iter().enumerate() {
                        for j in 0..self.x.ncols() {
                            noisy.write(i, j, m.read(r, j));
                        }
                    }
                }
                let xhat = forward(noisy.as_ref(), params)?.xhat;
                Ok(-empirical_distortion(self.x, xhat.as_ref())?)
            }
            _ => Ok(-terms.distortion),
        }
    }

    fn sweep(
        &self,
        start: &AutoEncoderParams,
        step: f64,
        epoch: usize,
        noise: Option<&[Mat<f64>]>,
    ) -> Result<AutoEncoderParams> {
        let mut params = start.clone();
        for b in 0..self.batches.len() {
            let g = self.batch_gradients(&params, b, noise.map(|n| &n[b]))?;
            if !g.is_finite() {
                return Err(non_finite(&params, epoch, b));
            }
            params = params.ascend(&g, step);
        }
        Ok(params)
    }
}

/// Batch input plus isotropic noise drawn from the `(seed, epoch, batch)` stream.
pub fn corrupt(x: MatRef<'_, f64>, sigma: f64, seed: u64, epoch: usize, batch: usize) -> Mat<f64> {
    let mut rng = RandomStream::new(seed, streams::noise(epoch, batch));
    let mut out = Mat::zeros(x.nrows(), x.ncols());
    for i in 0..x.nrows() {
        for j in 0..x.ncols() {
            out.write(i, j, x.read(i, j) + sigma * rng.normal());
        }
    }
    out
}

/// Trains from `init` and returns the final parameters with the per-epoch history.
///
/// A non-finite gradient aborts with the failing epoch and batch; a non-finite
/// full-set objective reports the batch count as the batch index.
pub fn train(
    x: MatRef<'_, f64>,
    init: &AutoEncoderParams,
    cfg: &TrainConfig,
) -> Result<(AutoEncoderParams, TrainHistory)> {
    cfg.validate()?;
    init.validate()?;
    if x.ncols() != init.input_dim() || x.nrows() == 0 {
        return Err(Error::usage(format!(
            "data is {}x{} but the model expects {} columns",
            x.nrows(),
            x.ncols(),
            init.input_dim()
        )));
    }
    let obj = cfg.lagrangian()?;
    let plan = match cfg.batch_mode {
        BatchMode::Full => BatchPlan::full(x.nrows()),
        BatchMode::Clustered(k) => precluster_minibatches(x, k, cfg.seed)?,
    };
    let batches = plan
        .batches
        .into_iter()
        .map(|indices| {
            let xb = select_rows(x, &indices);
            let kx = match cfg.objective {
                ObjectiveKind::Rdae => Some(normalized_gram(xb.as_ref(), cfg.sigma_x)?),
                _ => None,
            };
            Ok(Batch { indices, x: xb, kx })
        })
        .collect::<Result<Vec<_>>>()?;
    let trainer = Trainer {
        x,
        cfg: *cfg,
        obj,
        kx_full: normalized_gram(x, cfg.sigma_x)?,
        batches,
    };

    let mut params = init.clone();
    let initial = trainer.evaluate(&params)?;
    if !initial.is_finite() {
        return Err(non_finite(&params, 0, trainer.batches.len()));
    }
    let mut step = cfg.step_size;
    let mut records = Vec::with_capacity(cfg.epochs);
    let mut current = initial;
    if step == 0.0 {
        records.resize(cfg.epochs, initial);
        return Ok((params, TrainHistory { initial, records, final_step: step }));
    }

    for epoch in 1..=cfg.epochs {
        let noise = trainer.epoch_noise(epoch);
        let noise = noise.as_deref();
        let baseline = trainer.score(&params, &current, noise)?;
        let mut outcome = current;
        for halvings in 0..=MAX_HALVINGS {
            let candidate = trainer.sweep(&params, step, epoch, noise)?;
            let terms = trainer.evaluate(&candidate)?;
            let score = trainer.score(&candidate, &terms, noise)?;
            if !terms.is_finite() || !score.is_finite() {
                return Err(non_finite(&candidate, epoch, trainer.batches.len()));
            }
            if score >= baseline {
                params = candidate;
                outcome = terms;
                break;
            }
            if halvings < MAX_HALVINGS {
                step *= 0.5;
            }
        }
        current = outcome;
        records.push(outcome);
    }
    Ok((
        params,
        TrainHistory {
            initial,
            records,
            final_step: step,
        },
    ))
}
