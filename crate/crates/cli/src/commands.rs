//! Subcommands other than `train`.

use std::fmt::Write as _;

use rdae::autoencoder::lagrangian_gradients;
use rdae::data::pgm::{render_pgm_grid, TileLayout};
use rdae::data::synthetic::{sample_gaussian, sample_gmm, GaussianSpec, MixtureSpec};
use rdae::data::csv;
use rdae::energy::{energy_landscape, mean_energy, GridSpec};
use rdae::gradcheck::{check_against, Tolerance};
use rdae::rd;
use rdae::rng::{streams, RandomStream};
use rdae::{checkpoint, Activation, AutoEncoderParams, EntropySpec, Error, Matrix, Objective, Result};
use serde::{Deserialize, Serialize};

use crate::manifest;
use crate::{EnergyMapArgs, ExportBasesArgs, GenDataArgs, GradCheckArgs, Outcome, RdCurveArgs};

pub const PRESETS: [&str; 3] = ["gauss2d", "gmm3", "blobs"];

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum SourceSpec {
    Mixture(MixtureSpec),
    Gaussian(GaussianSpec),
}

#[derive(Debug, Serialize)]
struct DataManifest {
    command: &'static str,
    source: String,
    n: usize,
    seed: u64,
    tool_version: &'static str,
    output_fingerprint: String,
}

fn parse_list<const K: usize>(s: &str, what: &str) -> Result<[f64; K]> {
    let vals: Vec<f64> = s
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Usage(format!("{what}: expected {K} comma-separated numbers, got '{s}'")))?;
    vals.try_into()
        .map_err(|_| Error::Usage(format!("{what}: expected {K} comma-separated numbers, got '{s}'")))
}

fn steps_from(v: f64, what: &str) -> Result<usize> {
    if v.fract() != 0.0 || v < 0.0 || v > 1e7 {
        return Err(Error::Usage(format!("{what}: step count must be a whole number, got {v}")));
    }
    Ok(v as usize)
}

pub fn gen_data(args: &GenDataArgs) -> Result<Outcome> {
    if args.n == 0 {
        return Err(Error::Usage("--n must be >= 1".into()));
    }
    let (x, source) = match (&args.preset, &args.spec) {
        (_, Some(path)) => {
            let bytes = manifest::read_bytes(path)?;
            let spec: SourceSpec = toml::from_str(&String::from_utf8_lossy(&bytes))
                .map_err(|e| Error::Usage(format!("{}: not a Gaussian or mixture spec: {e}", path.display())))?;
            let x = match spec {
                SourceSpec::Mixture(m) => sample_gmm(&m, args.n, args.seed)?,
                SourceSpec::Gaussian(g) => {
                    GaussianSpec::new(g.mean, g.covariance).and_then(|g| sample_gaussian(&g, args.n, args.seed))?
                }
            };
            (x, path.display().to_string())
        }
        (Some(preset), None) => {
            let x = match preset.as_str() {
                "gauss2d" => sample_gaussian(&GaussianSpec::correlated_2d(), args.n, args.seed)?,
                "gmm3" => sample_gmm(&MixtureSpec::three_component_2d(), args.n, args.seed)?,
                "blobs" => sample_gmm(&MixtureSpec::separated_blobs(), args.n, args.seed)?,
                other => {
                    return Err(Error::Usage(format!(
                        "unknown preset '{other}'; choose one of {}",
                        PRESETS.join(", ")
                    )))
                }
            };
            (x, preset.clone())
        }
        (None, None) => return Err(Error::Usage("give a preset or --spec".into())),
    };
    let text = csv::matrix_to_string(x.as_ref());
    manifest::write(
        &manifest::sidecar(&args.out),
        &DataManifest {
            command: "gen-data",
            source,
            n: args.n,
            seed: args.seed,
            tool_version: env!("CARGO_PKG_VERSION"),
            output_fingerprint: manifest::fingerprint(text.as_bytes()),
        },
    )?;
    manifest::write_bytes(&args.out, text.as_bytes())?;
    println!("wrote {}x{} samples to {}", x.nrows(), x.ncols(), args.out.display());
    Ok(Outcome::Ok)
}

pub fn grad_check(args: &GradCheckArgs) -> Result<Outcome> {
    let activations: Vec<Activation> = if args.activation == "all" {
        Activation::ALL.to_vec()
    } else {
        vec![args.activation.parse()?]
    };
    if args.n < 2 || args.d == 0 || args.units == 0 {
        return Err(Error::Usage("grad-check needs n >= 2, d >= 1 and units >= 1".into()));
    }
    let mut rng = RandomStream::new(args.seed, streams::DATA);
    let x = Matrix::from_fn(args.n, args.d, |_, _| rng.normal());
    let mut all_ok = true;
    for &act in &activations {
        let params = AutoEncoderParams::init_uniform(args.d, args.units, act, args.seed);
        for &mu in &args.mu {
            for &alpha in &args.alpha {
                let obj = Objective::new(mu, EntropySpec::with_alpha(alpha)?, args.sigma, args.sigma)?;
                let (_, mut analytic) = lagrangian_gradients(x.as_ref(), &params, &obj)?;
                if args.perturb {
                    let v = analytic.da.read(0, 0);
                    analytic.da.write(0, 0, v + 1e-2 * (1.0 + v.abs()));
                }
                let report = check_against(x.as_ref(), &params, &obj, &analytic, args.h, Tolerance::default())?;
                for b in &report.blocks {
                    let mut line = format!(
                        "{act:<8} mu={mu} alpha={alpha} {:<2} max_rel={:.3e} max_abs={:.3e} {}",
                        b.name,
                        b.max_relative_error,
                        b.max_absolute_error,
                        if b.passed { "ok" } else { "FAIL" }
                    );
                    if !b.passed {
                        let _ = write!(
                            line,
                            " worst entry ({}, {}): analytic {:e} numeric {:e}",
                            b.worst_entry.0, b.worst_entry.1, b.worst_analytic, b.worst_numeric
                        );
                    }
                    println!("{line}");
                }
                all_ok &= report.passed();
            }
        }
    }
    Ok(if all_ok { Outcome::Ok } else { Outcome::CheckFailed })
}

pub fn energy_map(args: &EnergyMapArgs) -> Result<Outcome> {
    let [x_min, x_max, y_min, y_max, steps] = parse_list::<5>(&args.grid, "--grid")?;
    let grid = GridSpec {
        x_min,
        x_max,
        y_min,
        y_max,
        steps: steps_from(steps, "--grid")?,
    };
    let params = checkpoint::load(&args.params)?;
    let nodes = energy_landscape(&params, &grid)?;
    let mut out = String::from("x,y,energy\n");
    for n in &nodes {
        let _ = writeln!(out, "{},{},{}", n.x, n.y, n.energy);
    }
    let grid_mean = nodes.iter().map(|n| n.energy).sum::<f64>() / nodes.len() as f64;
    match &args.data {
        Some(path) => {
            let data = csv::read_csv_matrix(path)?;
            let on = mean_energy(&params, data.as_ref())?;
            let _ = writeln!(
                out,
                "# on_manifold_mean={on} off_manifold_mean={grid_mean} ratio={}",
                on / grid_mean
            );
        }
        None => {
            let _ = writeln!(out, "# off_manifold_mean={grid_mean}");
        }
    }
    manifest::write_bytes(&args.out, out.as_bytes())?;
    Ok(Outcome::Ok)
}

pub fn rd_curve_csv(variances: &[f64], d_grid: &str) -> Result<String> {
    let [lo, hi, steps] = parse_list::<3>(d_grid, "--d-grid")?;
    let curve = rd::rd_curve(variances, lo, hi, steps_from(steps, "--d-grid")?)?;
    let mut out = String::from("D,rate_bits,water_level\n");
    for p in curve {
        let _ = writeln!(out, "{},{},{}", p.distortion, p.rate_bits, p.water_level);
    }
    Ok(out)
}

pub fn rd_curve(args: &RdCurveArgs) -> Result<Outcome> {
    let text = rd_curve_csv(&args.variances, &args.d_grid)?;
    manifest::write_bytes(&args.out, text.as_bytes())?;
    Ok(Outcome::Ok)
}

fn parse_tile(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::Usage(format!("--tile must look like HxW, got '{s}'"));
    let (h, w) = s.split_once('x').ok_or_else(bad)?;
    Ok((h.parse().map_err(|_| bad())?, w.parse().map_err(|_| bad())?))
}

/// Rows of `W` (analysis) or columns of `A` (synthesis), one basis vector per row.
pub fn basis_matrix(params: &AutoEncoderParams, which: &str) -> Result<Matrix> {
    match which {
        "analysis" => Ok(params.w.clone()),
        "synthesis" => Ok(params.a.transpose().to_owned()),
        other => Err(Error::Usage(format!(
            "--which must be 'analysis' or 'synthesis', got '{other}'"
        ))),
    }
}

pub fn export_bases(args: &ExportBasesArgs) -> Result<Outcome> {
    let (tile_h, tile_w) = parse_tile(&args.tile)?;
    let params = checkpoint::load(&args.params)?;
    let basis = basis_matrix(&params, &args.which)?;
    let layout = TileLayout {
        tile_h,
        tile_w,
        cols: args.cols,
    };
    let bytes = render_pgm_grid(basis.as_ref(), layout)?;
    manifest::write_bytes(&args.out, &bytes)?;
    let (h, w) = layout.image_size(basis.nrows());
    println!("wrote {} tiles ({w}x{h} pixels) to {}", basis.nrows(), args.out.display());
    Ok(Outcome::Ok)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn list_parsing() {
        assert_eq!(parse_list::<3>("1, 2,3.5", "x").unwrap(), [1.0, 2.0, 3.5]);
        assert!(parse_list::<3>("1,2", "x").is_err());
        assert!(parse_list::<2>("1,a", "x").is_err());
        assert!(steps_from(2.5, "x").is_err());
        assert_eq!(steps_from(4.0, "x").unwrap(), 4);
    }

    #[test]
    fn tile_parsing() {
        assert_eq!(parse_tile("28x28").unwrap(), (28, 28));
        assert_eq!(parse_tile("1x2").unwrap(), (1, 2));
        assert!(parse_tile("28").is_err());
        assert!(parse_tile("ax2").is_err());
    }

    #[test]
    fn rd_curve_rows() {
        let text = rd_curve_csv(&[4.0, 1.0], "0.5,1.5,3").unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "D,rate_bits,water_level");
        let row: Vec<f64> = lines[2].split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(row[0], 1.0);
        assert!((row[1] - 2.0).abs() < 1e-9);
    }
}
