use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rdae::activation::Activation;
use rdae::{checkpoint, AutoEncoderParams, Matrix};
use tempfile::TempDir;

fn rdae(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rdae"))
        .args(args)
        .output()
        .expect("failed to launch rdae")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("terminated by signal")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn p(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn data_rows(text: &str) -> Vec<&str> {
    text.lines().skip(1).filter(|l| !l.starts_with('#')).collect()
}

fn identity_checkpoint(path: &Path) {
    let eye = Matrix::from_fn(2, 2, |i, j| if i == j { 1.0 } else { 0.0 });
    let params = AutoEncoderParams::new(eye.clone(), vec![0.0; 2], eye, vec![0.0; 2], Activation::Linear).unwrap();
    checkpoint::save(&params, path).unwrap();
}

#[test]
fn gen_data_presets_are_seeded() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (p(&dir, "a.csv"), p(&dir, "b.csv"));
    for preset in ["gauss2d", "gmm3", "blobs"] {
        assert_eq!(code(&rdae(&["gen-data", preset, "--n", "500", "--seed", "7", "--out", s(&a)])), 0);
        assert_eq!(code(&rdae(&["gen-data", preset, "--n", "500", "--seed", "7", "--out", s(&b)])), 0);
        let text = std::fs::read_to_string(&a).unwrap();
        assert_eq!(text, std::fs::read_to_string(&b).unwrap());
        assert_eq!(text.lines().count(), 500);
        assert!(text.lines().all(|l| l.split(',').count() == 2));
        assert!(Path::new(&format!("{}.manifest.toml", s(&a))).exists());
    }
    rdae(&["gen-data", "gauss2d", "--n", "50", "--seed", "8", "--out", s(&b)]);
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn gen_data_usage_errors() {
    let dir = TempDir::new().unwrap();
    let out = rdae(&["gen-data", "spiral", "--out", s(&p(&dir, "x.csv"))]);
    assert_eq!(code(&out), 64);
    assert!(String::from_utf8_lossy(&out.stderr).contains("gauss2d, gmm3, blobs"));
    assert_eq!(code(&rdae(&["gen-data", "gmm3", "--n", "0", "--out", s(&p(&dir, "x.csv"))])), 64);
    assert_eq!(code(&rdae(&["gen-data", "--out", s(&p(&dir, "x.csv"))])), 64);
}

#[test]
fn gen_data_from_spec_file() {
    let dir = TempDir::new().unwrap();
    let spec = p(&dir, "spec.toml");
    std::fs::write(&spec, "mean = [1.0, 2.0, 3.0]\ncovariance = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]\n").unwrap();
    let out = p(&dir, "x.csv");
    assert_eq!(code(&rdae(&["gen-data", "--spec", s(&spec), "--n", "10", "--out", s(&out)])), 0);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.lines().all(|l| l.split(',').count() == 3));
    std::fs::write(&spec, "mean = [1.0]\n").unwrap();
    assert_eq!(code(&rdae(&["gen-data", "--spec", s(&spec), "--out", s(&out)])), 64);
}

#[test]
fn train_writes_outputs_and_rejects_bad_flags() {
    let dir = TempDir::new().unwrap();
    let data = p(&dir, "g.csv");
    rdae(&["gen-data", "gauss2d", "--n", "60", "--seed", "1", "--out", s(&data)]);
    let (params, hist) = (p(&dir, "p.txt"), p(&dir, "h.csv"));
    let base = ["train", "--data", s(&data), "--out-params", s(&params), "--out-history", s(&hist)];

    let mut ok = base.to_vec();
    ok.extend(["--units", "4", "--activation", "relu", "--epochs", "3", "--batch", "cluster:2"]);
    assert_eq!(code(&rdae(&ok)), 0);
    let loaded = checkpoint::load(&params).unwrap();
    assert_eq!((loaded.input_dim(), loaded.hidden_dim()), (2, 4));
    let history = std::fs::read_to_string(&hist).unwrap();
    assert!(history.starts_with("epoch,lagrangian,joint_entropy,marginal_entropy,distortion\n"));
    assert_eq!(history.lines().count(), 5);
    let manifest = std::fs::read_to_string(format!("{}.manifest.toml", s(&params))).unwrap();
    assert!(manifest.contains("dataset_fingerprint"));
    assert!(manifest.contains("batch = \"cluster:2\""));

    for bad in [
        vec!["--epochs", "0"],
        vec!["--activation", "tanh"],
        vec!["--batch", "cluster:0"],
        vec!["--objective", "denoise"],
        vec!["--mu", "-1"],
        vec!["--no-such-flag"],
    ] {
        let mut args = base.to_vec();
        args.extend(bad.iter().copied());
        assert_eq!(code(&rdae(&args)), 64, "{bad:?}");
    }
}

#[test]
fn numerical_abort_exits_2_after_writing_the_manifest() {
    let dir = TempDir::new().unwrap();
    let data = p(&dir, "huge.csv");
    std::fs::write(&data, "1e300,1e300\n-1e300,2e300\n0,0\n").unwrap();
    let params = p(&dir, "p.txt");
    let out = rdae(&[
        "train", "--data", s(&data), "--epochs", "2",
        "--out-params", s(&params), "--out-history", s(&p(&dir, "h.csv")),
    ]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("non-finite"));
    assert!(Path::new(&format!("{}.manifest.toml", s(&params))).exists());
    assert!(!params.exists());
}

#[test]
fn config_file_precedence_and_manifest_replay() {
    let dir = TempDir::new().unwrap();
    let data = p(&dir, "g.csv");
    rdae(&["gen-data", "gmm3", "--n", "40", "--seed", "3", "--out", s(&data)]);
    let cfg = p(&dir, "cfg.toml");
    std::fs::write(&cfg, "units = 5\nactivation = \"softplus\"\nepochs = 2\nmu = 3.0\n").unwrap();
    let (p1, h1) = (p(&dir, "p1.txt"), p(&dir, "h1.csv"));
    let out = rdae(&[
        "train", "--data", s(&data), "--config", s(&cfg), "--mu", "0.75",
        "--out-params", s(&p1), "--out-history", s(&h1),
    ]);
    assert_eq!(code(&out), 0);
    let manifest = p(&dir, "p1.txt.manifest.toml");
    let text = std::fs::read_to_string(&manifest).unwrap();
    assert!(text.contains("units = 5") && text.contains("mu = 0.75") && text.contains("epochs = 2"));
    assert_eq!(checkpoint::load(&p1).unwrap().activation, Activation::Softplus);

    let (p2, h2) = (p(&dir, "p2.txt"), p(&dir, "h2.csv"));
    let out = rdae(&[
        "train", "--data", s(&data), "--config", s(&manifest),
        "--out-params", s(&p2), "--out-history", s(&h2),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    assert_eq!(std::fs::read(&h1).unwrap(), std::fs::read(&h2).unwrap());

    std::fs::write(&cfg, "unitz = 5\n").unwrap();
    let out = rdae(&[
        "train", "--data", s(&data), "--config", s(&cfg),
        "--out-params", s(&p2), "--out-history", s(&h2),
    ]);
    assert_eq!(code(&out), 64);
}

#[test]
fn mnist_input_is_subset_and_recorded() {
    let dir = TempDir::new().unwrap();
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data");
    let params = p(&dir, "p.txt");
    let out = rdae(&[
        "train",
        "--mnist-images", s(&fixtures.join("mnist-2000-images.idx3-ubyte")),
        "--mnist-labels", s(&fixtures.join("mnist-2000-labels.idx1-ubyte")),
        "--subset", "30", "--units", "4", "--activation", "logsig",
        "--sigma-x", "8.4", "--sigma-xhat", "8.4", "--epochs", "1", "--step", "0.01",
        "--out-params", s(&params), "--out-history", s(&p(&dir, "h.csv")),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let loaded = checkpoint::load(&params).unwrap();
    assert_eq!(loaded.input_dim(), 784);
    let manifest = std::fs::read_to_string(p(&dir, "p.txt.manifest.toml")).unwrap();
    assert!(manifest.contains("subset_indices"));
    assert!(manifest.contains("samples = 30"));
}

#[test]
fn grad_check_exit_codes() {
    let out = rdae(&["grad-check"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert_eq!(stdout(&out).lines().filter(|l| l.ends_with(" ok")).count(), 4);

    let out = rdae(&["grad-check", "--activation", "all"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert_eq!(stdout(&out).lines().filter(|l| l.ends_with(" ok")).count(), 20);

    let out = rdae(&["grad-check", "--perturb"]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("A  max_rel"));
    assert!(stdout(&out).contains("FAIL worst entry (0, 0)"));

    assert_eq!(code(&rdae(&["grad-check", "--activation", "tanh"])), 64);
}

#[test]
fn energy_map_cases() {
    let dir = TempDir::new().unwrap();
    let ident = p(&dir, "id.txt");
    identity_checkpoint(&ident);
    let out = p(&dir, "e.csv");
    assert_eq!(code(&rdae(&["energy-map", "--params", s(&ident), "--grid", "-2,2,-1,1,5", "--out", s(&out)])), 0);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("x,y,energy\n"));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 25);
    assert!(rows.iter().all(|r| r.ends_with(",0")));

    assert_eq!(code(&rdae(&["energy-map", "--params", s(&ident), "--grid", "0,1,0,1,2", "--out", s(&out)])), 0);
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(data_rows(&text), vec!["0,0,0", "1,0,0", "0,1,0", "1,1,0"]);

    let data = p(&dir, "g.csv");
    rdae(&["gen-data", "gmm3", "--n", "20", "--out", s(&data)]);
    let zero = p(&dir, "zero.txt");
    checkpoint::save(&AutoEncoderParams::zeros(2, 3, Activation::Linear), &zero).unwrap();
    rdae(&["energy-map", "--params", s(&zero), "--grid", "-6,10,-8,4,5", "--data", s(&data), "--out", s(&out)]);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.lines().last().unwrap().starts_with("# on_manifold_mean="));
    assert!(text.contains(" ratio="));

    let wide = p(&dir, "wide.txt");
    checkpoint::save(&AutoEncoderParams::zeros(3, 2, Activation::Linear), &wide).unwrap();
    assert_eq!(code(&rdae(&["energy-map", "--params", s(&wide), "--grid", "0,1,0,1,3", "--out", s(&out)])), 64);
    assert_eq!(code(&rdae(&["energy-map", "--params", s(&ident), "--grid", "0,1,0,1", "--out", s(&out)])), 64);
    assert_eq!(code(&rdae(&["energy-map", "--params", s(&ident), "--grid", "0,1,0,1,1", "--out", s(&out)])), 64);
}

#[test]
fn rd_curve_rows() {
    let dir = TempDir::new().unwrap();
    let out = p(&dir, "rd.csv");
    assert_eq!(code(&rdae(&["rd-curve", "--variances", "4,1", "--d-grid", "0.5,8,16", "--out", s(&out)])), 0);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("D,rate_bits,water_level\n"));
    let rows: Vec<Vec<f64>> = data_rows(&text)
        .iter()
        .map(|r| r.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 16);
    let at_one = rows.iter().find(|r| r[0] == 1.0).unwrap();
    assert!((at_one[1] - 2.0).abs() < 1e-9);
    assert!(rows.iter().filter(|r| r[0] >= 5.0).all(|r| r[1] == 0.0));
    assert!(rows.windows(2).all(|w| w[1][1] <= w[0][1]));
    assert_eq!(code(&rdae(&["rd-curve", "--variances", "4,-1", "--d-grid", "1,2,3", "--out", s(&out)])), 64);
    assert_eq!(code(&rdae(&["rd-curve", "--variances", "4,1", "--d-grid", "2,1,3", "--out", s(&out)])), 64);
}

#[test]
fn export_bases_cases() {
    let dir = TempDir::new().unwrap();
    let toy = p(&dir, "toy.txt");
    checkpoint::save(&AutoEncoderParams::init_uniform(2, 4, Activation::Relu, 5), &toy).unwrap();
    let (a, b) = (p(&dir, "a.pgm"), p(&dir, "b.pgm"));
    let out = rdae(&["export-bases", "--params", s(&toy), "--which", "analysis", "--tile", "1x2", "--out", s(&a)]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("wrote 4 tiles"));
    let (w, h, px) = rdae::data::pgm::parse_pgm(&std::fs::read(&a).unwrap()).unwrap();
    assert_eq!((w, h), (4 * 2 + 3, 1));
    assert_eq!(px.len(), w * h);
    assert_eq!(code(&rdae(&["export-bases", "--params", s(&toy), "--which", "synthesis", "--tile", "1x2", "--out", s(&b)])), 0);
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    assert_eq!(code(&rdae(&["export-bases", "--params", s(&toy), "--tile", "28x28", "--out", s(&a)])), 64);
    assert_eq!(code(&rdae(&["export-bases", "--params", s(&toy), "--which", "both", "--tile", "1x2", "--out", s(&a)])), 64);
}

#[test]
fn missing_checkpoint_is_usage_error() {
    let dir = TempDir::new().unwrap();
    let out = rdae(&["export-bases", "--params", s(&p(&dir, "nope.txt")), "--out", s(&p(&dir, "x.pgm"))]);
    assert_eq!(code(&out), 64);
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.txt"));
}
