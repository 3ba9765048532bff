//! End-to-end runs of the `grf` binary.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn grf(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_grf"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("GRF_SEED")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn contents(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect()
}

fn mnist_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist-subset")
}

const THEORY: &[&str] = &["theory", "--N", "1,10", "--etas", "opt,2opt", "--pdf", "--opt-curve", "--phi-points", "41"];
const DESCENT: &[&str] = &["descent", "--N", "5", "--M", "400", "--points", "300", "--etas", "0.5opt,opt", "--ecdf-points", "300"];
const EULER: &[&str] = &["euler", "--N", "2,5", "--points", "41"];
const SINE: &[&str] =
    &["classify", "sine", "--NP", "8", "--M", "300", "--epochs", "2", "--n-train", "400", "--n-test", "100"];

#[test]
fn every_subcommand_is_byte_deterministic() {
    let mnist = mnist_dir();
    let mnist = mnist.to_str().unwrap();
    let mnist_args: Vec<&str> = vec![
        "classify", "mnist", "--mnist-dir", mnist, "--NP", "6", "--M", "900", "--epochs", "1", "--n-train", "200", "--n-test", "100",
    ];
    let sweep: Vec<&str> = SINE.iter().copied().chain(["--sweep-etas", "0.01,1", "--sweep-n", "10,12"]).collect();
    for args in [THEORY, DESCENT, EULER, SINE, &mnist_args, &sweep] {
        let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
        let (oa, ob) = (grf(a.path(), args), grf(b.path(), args));
        assert_eq!(code(&oa), 0, "{args:?}: {}", String::from_utf8_lossy(&oa.stderr));
        assert_eq!(code(&ob), 0, "{args:?}");
        let strip = |o: &Output, d: &TempDir| String::from_utf8_lossy(&o.stdout).replace(d.path().to_str().unwrap(), "OUT");
        assert_eq!(strip(&oa, &a), strip(&ob, &b), "{args:?}");
        let (ca, cb) = (contents(a.path()), contents(b.path()));
        assert!(!ca.is_empty(), "{args:?} wrote nothing");
        assert_eq!(ca, cb, "{args:?}");
    }
}

#[test]
fn outputs_have_sidecars_and_headers() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&grf(dir.path(), THEORY)), 0);
    assert_eq!(code(&grf(dir.path(), &["theory", "--N", "1,10", "--etas", "0..2opt:5"])), 0);
    let files = contents(dir.path());
    for name in ["opt_curve.csv", "pdf_N1.csv", "pdf_N10.csv", "theory_curve_N1.csv", "theory_curve_N10.csv"] {
        assert!(files.contains_key(name), "{name} missing: {:?}", files.keys());
        let sidecar: serde_json::Value = serde_json::from_slice(&files[&format!("{name}.json")]).unwrap();
        assert_eq!(sidecar["command"], "theory");
        assert_eq!(sidecar["config"]["seed"], 20_190_601);
    }
    assert_eq!(String::from_utf8_lossy(&files["theory_curve_N10.csv"]).lines().count(), 6);
    let curve = String::from_utf8(files["opt_curve.csv"].clone()).unwrap();
    assert!(curve.starts_with("N,eta_opt,expected_at_opt,asymptotic,step_length,log10_random_search_tries\n"));
    let n1: Vec<f64> = curve.lines().nth(1).unwrap().split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(n1[0], 1.0);
    assert!((n1[2] + 0.385).abs() < 1e-3, "{n1:?}");
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&grf(dir.path(), &["theory", "--N", "1..0"])), 2);
    assert_eq!(code(&grf(dir.path(), &["theory", "--etas", "fast"])), 2);
    assert_eq!(code(&grf(dir.path(), &["descent", "--no-such-flag"])), 2);
    assert_eq!(code(&grf(dir.path(), &["classify", "sine", "--beta-init", "uniform"])), 2);
    let missing = grf(dir.path(), &["classify", "mnist", "--mnist-dir", dir.path().join("nowhere").to_str().unwrap()]);
    assert_eq!(code(&missing), 3);
    assert!(String::from_utf8_lossy(&missing.stderr).contains("train-images-idx3-ubyte"));
    let tight: Vec<&str> = DESCENT.iter().copied().chain(["--bands", "0", "--no-ecdf"]).collect();
    let band = grf(dir.path(), &tight);
    assert_eq!(code(&band), 1);
    assert!(String::from_utf8_lossy(&band.stderr).contains("outside 0 standard errors"));
    let demanding: Vec<&str> = SINE.iter().copied().chain(["--min-accuracy", "1.01"]).collect();
    assert_eq!(code(&grf(dir.path(), &demanding)), 1);
    let config = dir.path().join("missing.conf");
    assert_eq!(code(&grf(dir.path(), &["--config", config.to_str().unwrap(), "theory"])), 3);
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = TempDir::new().unwrap();
    let conf = dir.path().join("run.conf");
    fs::write(&conf, "# theory defaults\nN = 7\npdf = true\nopt-curve = false\nphi-points = 11\n").unwrap();
    let from_file = dir.path().join("a");
    assert_eq!(code(&grf(&from_file, &["--config", conf.to_str().unwrap(), "theory"])), 0);
    let files = contents(&from_file);
    assert!(files.contains_key("pdf_N7.csv"));
    assert!(!files.contains_key("opt_curve.csv"));
    assert_eq!(String::from_utf8_lossy(&files["pdf_N7.csv"]).lines().count(), 12);

    let overridden = dir.path().join("b");
    assert_eq!(code(&grf(&overridden, &["--config", conf.to_str().unwrap(), "theory", "--N", "4"])), 0);
    let files = contents(&overridden);
    assert!(files.contains_key("pdf_N4.csv"));
    assert!(!files.contains_key("pdf_N7.csv"));

    fs::write(&conf, "N 7\n").unwrap();
    assert_eq!(code(&grf(dir.path(), &["--config", conf.to_str().unwrap(), "theory"])), 2);
}

#[test]
fn seed_comes_from_environment_unless_given() {
    let run = |dir: &Path, env: Option<&str>, extra: &[&str]| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_grf"));
        cmd.arg("--out").arg(dir).args(extra).args(DESCENT).arg("--no-ecdf").env_remove("GRF_SEED");
        if let Some(seed) = env {
            cmd.env("GRF_SEED", seed);
        }
        assert!(cmd.output().unwrap().status.success());
        fs::read(dir.join("descent_sweep.csv")).unwrap()
    };
    let t = TempDir::new().unwrap();
    let via_env = run(&t.path().join("env"), Some("5"), &[]);
    let via_flag = run(&t.path().join("flag"), None, &["--seed", "5"]);
    let default = run(&t.path().join("default"), None, &[]);
    let flag_wins = run(&t.path().join("both"), Some("9"), &["--seed", "5"]);
    assert_eq!(via_env, via_flag);
    assert_eq!(flag_wins, via_flag);
    assert_ne!(via_env, default);
}

#[test]
fn saved_field_matches_state_fingerprint() {
    let dir = TempDir::new().unwrap();
    let snap = dir.path().join("field.grfs");
    let args: Vec<&str> = SINE.iter().copied().chain(["--save-field", snap.to_str().unwrap(), "--export-dataset"]).collect();
    assert_eq!(code(&grf(dir.path(), &args)), 0);
    let field = grf_core::SpectralField::from_snapshot_bytes(&fs::read(&snap).unwrap()).unwrap();
    let state: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("sine_state.json")).unwrap()).unwrap();
    assert_eq!(state["field"]["fingerprint"], format!("{:016x}", field.fingerprint()));
    assert_eq!(state["beta"].as_array().unwrap().len(), 8);
    assert_eq!(field.dimension(), 10);
    let train = fs::read_to_string(dir.path().join("sine_train_normalized.csv")).unwrap();
    assert!(train.starts_with("label,f0,f1\n"));
    assert_eq!(train.lines().count(), 401);
}
