//! `rdae train`: flag/config merging, data loading, manifest, training.

use std::path::PathBuf;

use clap::Args;
use rdae::data::{center_columns, csv, mnist};
use rdae::training::{train, BatchMode, ObjectiveKind, TrainConfig};
use rdae::{checkpoint, Activation, AutoEncoderParams, EntropySpec, Error, Matrix, Result};
use serde::{Deserialize, Serialize};

use crate::manifest;
use crate::Outcome;

const DEFAULT_UNITS: usize = 10;

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Training data as headerless CSV, one sample per row.
    #[arg(long, conflicts_with_all = ["mnist_images", "mnist_labels"])]
    pub data: Option<PathBuf>,
    /// MNIST images in IDX format; pixels are scaled to [0,1] and centered.
    #[arg(long, requires = "mnist_labels")]
    pub mnist_images: Option<PathBuf>,
    /// MNIST labels in IDX format, paired with --mnist-images
    #[arg(long, requires = "mnist_images")]
    pub mnist_labels: Option<PathBuf>,
    /// Train on the first N samples after a seeded shuffle (MNIST only).
    #[arg(long, requires = "mnist_images")]
    pub subset: Option<usize>,

    /// Optional key = value file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Hidden units [default: 10]
    #[arg(long)]
    pub units: Option<usize>,
    /// linear, relu, logsig, satlu or softplus [default: linear]
    #[arg(long)]
    pub activation: Option<Activation>,
    /// Distortion multiplier [default: 0.5]
    #[arg(long)]
    pub mu: Option<f64>,
    /// Renyi entropy order [default: 1.01]
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Input kernel size [default: 0.2828427125, i.e. 0.2*sqrt(2)]
    #[arg(long)]
    pub sigma_x: Option<f64>,
    /// Reconstruction kernel size [default: 0.2828427125]
    #[arg(long)]
    pub sigma_xhat: Option<f64>,
    /// Initial step size [default: 0.05]
    #[arg(long)]
    pub step: Option<f64>,
    /// Epochs, at least 1 [default: 100]
    #[arg(long)]
    pub epochs: Option<usize>,
    /// full or cluster:k [default: full]
    #[arg(long)]
    pub batch: Option<BatchMode>,
    /// rdae, plain or denoise:sigma [default: rdae]
    #[arg(long)]
    pub objective: Option<ObjectiveKind>,
    /// Seed for initialization, clustering and noise [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Eigenvalue floor inside the entropy gradient [default: 1e-12]
    #[arg(long)]
    pub eig_floor: Option<f64>,

    /// Checkpoint written after training
    #[arg(long)]
    pub out_params: PathBuf,
    /// Per-epoch history CSV, starting with an epoch 0 row
    #[arg(long)]
    pub out_history: PathBuf,
    /// Defaults to `<out-params>.manifest.toml`.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

/// Keys accepted in a `--config` file. A run manifest is itself a valid config file.
#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub units: Option<usize>,
    pub activation: Option<String>,
    pub mu: Option<f64>,
    pub alpha: Option<f64>,
    pub sigma_x: Option<f64>,
    pub sigma_xhat: Option<f64>,
    pub step: Option<f64>,
    pub epochs: Option<usize>,
    pub batch: Option<String>,
    pub objective: Option<String>,
    pub seed: Option<u64>,
    pub eig_floor: Option<f64>,
    /// Provenance written by `train`; ignored on input.
    pub run: Option<toml::Table>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedConfig {
    pub units: usize,
    pub activation: Activation,
    pub train: TrainConfig,
}

impl ResolvedConfig {
    fn echo(&self) -> ConfigFile {
        let t = &self.train;
        ConfigFile {
            units: Some(self.units),
            activation: Some(self.activation.to_string()),
            mu: Some(t.mu),
            alpha: Some(t.alpha),
            sigma_x: Some(t.sigma_x),
            sigma_xhat: Some(t.sigma_xhat),
            step: Some(t.step_size),
            epochs: Some(t.epochs),
            batch: Some(t.batch_mode.to_string()),
            objective: Some(t.objective.to_string()),
            seed: Some(t.seed),
            eig_floor: Some(t.eig_floor),
            run: None,
        }
    }
}

pub fn parse_config_file(text: &str) -> Result<ConfigFile> {
    toml::from_str(text).map_err(|e| Error::Usage(format!("config file: {e}")))
}

/// Flags take precedence over the file, the file over the defaults.
pub fn resolve(args: &TrainArgs, file: &ConfigFile) -> Result<ResolvedConfig> {
    let d = TrainConfig::default();
    let activation = match (&args.activation, &file.activation) {
        (Some(a), _) => *a,
        (None, Some(s)) => s.parse()?,
        (None, None) => Activation::Linear,
    };
    let batch_mode = match (&args.batch, &file.batch) {
        (Some(b), _) => *b,
        (None, Some(s)) => s.parse()?,
        (None, None) => d.batch_mode,
    };
    let objective = match (&args.objective, &file.objective) {
        (Some(o), _) => *o,
        (None, Some(s)) => s.parse()?,
        (None, None) => d.objective,
    };
    let units = args.units.or(file.units).unwrap_or(DEFAULT_UNITS);
    if units == 0 {
        return Err(Error::Usage("units must be >= 1".into()));
    }
    let train = TrainConfig {
        mu: args.mu.or(file.mu).unwrap_or(d.mu),
        alpha: args.alpha.or(file.alpha).unwrap_or(d.alpha),
        sigma_x: args.sigma_x.or(file.sigma_x).unwrap_or(d.sigma_x),
        sigma_xhat: args.sigma_xhat.or(file.sigma_xhat).unwrap_or(d.sigma_xhat),
        step_size: args.step.or(file.step).unwrap_or(d.step_size),
        epochs: args.epochs.or(file.epochs).unwrap_or(d.epochs),
        batch_mode,
        seed: args.seed.or(file.seed).unwrap_or(d.seed),
        objective,
        eig_floor: args.eig_floor.or(file.eig_floor).unwrap_or(EntropySpec::DEFAULT_EIG_FLOOR),
    };
    train.validate()?;
    Ok(ResolvedConfig {
        units,
        activation,
        train,
    })
}

struct Dataset {
    x: Matrix,
    fingerprint: String,
    source: String,
    subset_indices: Option<Vec<usize>>,
}

fn load_dataset(args: &TrainArgs, seed: u64) -> Result<Dataset> {
    if let Some(path) = &args.data {
        let bytes = manifest::read_bytes(path)?;
        let text = String::from_utf8(bytes.clone())
            .map_err(|_| Error::Format(format!("{}: not UTF-8 text", path.display())))?;
        return Ok(Dataset {
            x: csv::parse_matrix(&text)?,
            fingerprint: manifest::fingerprint(&bytes),
            source: path.display().to_string(),
            subset_indices: None,
        });
    }
    let (Some(images), Some(labels)) = (&args.mnist_images, &args.mnist_labels) else {
        return Err(Error::Usage("give --data or --mnist-images with --mnist-labels".into()));
    };
    let mut bytes = manifest::read_bytes(images)?;
    let label_bytes = manifest::read_bytes(labels)?;
    let set = mnist::parse_idx(&bytes, &label_bytes)?;
    bytes.extend_from_slice(&label_bytes);
    let (set, indices) = match args.subset {
        Some(n) => {
            let (s, idx) = set.subset(n, seed)?;
            (s, Some(idx))
        }
        None => (set, None),
    };
    let (x, _) = center_columns(set.images.as_ref());
    Ok(Dataset {
        x,
        fingerprint: manifest::fingerprint(&bytes),
        source: format!("{} + {}", images.display(), labels.display()),
        subset_indices: indices,
    })
}

fn manifest_table(cfg: &ResolvedConfig, data: &Dataset) -> ConfigFile {
    let mut run = toml::Table::new();
    run.insert("tool_version".into(), env!("CARGO_PKG_VERSION").into());
    run.insert("dataset".into(), data.source.clone().into());
    run.insert("dataset_fingerprint".into(), data.fingerprint.clone().into());
    run.insert("samples".into(), (data.x.nrows() as i64).into());
    run.insert("dimension".into(), (data.x.ncols() as i64).into());
    if let Some(idx) = &data.subset_indices {
        let list: Vec<toml::Value> = idx.iter().map(|&i| (i as i64).into()).collect();
        run.insert("subset_indices".into(), list.into());
    }
    ConfigFile {
        run: Some(run),
        ..cfg.echo()
    }
}

pub fn run(args: &TrainArgs) -> Result<Outcome> {
    let file = match &args.config {
        Some(p) => {
            let bytes = manifest::read_bytes(p)?;
            parse_config_file(&String::from_utf8_lossy(&bytes))?
        }
        None => ConfigFile::default(),
    };
    let cfg = resolve(args, &file)?;
    let data = load_dataset(args, cfg.train.seed)?;
    let manifest_path = args
        .manifest
        .clone()
        .unwrap_or_else(|| manifest::sidecar(&args.out_params));
    manifest::write(&manifest_path, &manifest_table(&cfg, &data))?;

    let init = AutoEncoderParams::init_uniform(data.x.ncols(), cfg.units, cfg.activation, cfg.train.seed);
    let (params, history) = train(data.x.as_ref(), &init, &cfg.train)?;
    checkpoint::save(&params, &args.out_params)?;
    history.write_csv(&args.out_history)?;
    let (first, last) = (&history.initial, history.last());
    println!(
        "trained {} epochs on {}x{}: lagrangian {} -> {}, distortion {} -> {}, final step {}",
        cfg.train.epochs,
        data.x.nrows(),
        data.x.ncols(),
        first.value,
        last.value,
        first.distortion,
        last.distortion,
        history.final_step
    );
    Ok(Outcome::Ok)
}
