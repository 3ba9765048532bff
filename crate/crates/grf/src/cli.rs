//! The `grf` command line: argument model, grid syntax and the four
//! subcommands.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use grf_core::classifier::{self, BetaInit, ClassifierConfig, ClassifierState};
use grf_core::datasets::{self, Dataset};
use grf_core::descent::{self, DescentRun, FieldMode, SweepConfig};
use grf_core::excursion::{self, EulerCurve};
use grf_core::{fieldsim, theory};
use serde::Serialize;

use crate::io::{dataset_table, ArtifactWriter, Cell, Table};
use crate::mnist::{self, Split};
use crate::{config, Failure};

pub const DEFAULT_SEED: u64 = 20_190_601;

#[derive(Debug, Parser)]
#[command(name = "grf", version, about = "Gradient descent on Gaussian random fields: theory, simulation and experiments")]
pub struct Cli {
    /// Master seed; every random stream is derived from it.
    #[arg(long, global = true, env = "GRF_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// `key = value` file of flag defaults; explicit flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form curves: mean and variance over η, densities, optimal rate.
    Theory(TheoryArgs),
    /// Monte Carlo single-step ensembles against the closed forms.
    Descent(DescentArgs),
    /// Expected Euler characteristic curves and the expected minimum.
    Euler(EulerArgs),
    /// Train the random-field classifier.
    Classify(ClassifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Desk,
    Extended,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EtaMode {
    Absolute,
    Scaled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Sine,
    Mnist,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct TheoryArgs {
    /// Dimensions: `500`, `1,10,100`, `1..1000` or `10..1000:10`.
    #[arg(long = "N", default_value = "500")]
    pub n: String,
    /// Learning rates: numbers, `opt`, `<k>opt`, or `lo..hi:count`.
    #[arg(long)]
    pub etas: Option<String>,
    /// Tabulate the density of the value after one step.
    #[arg(long)]
    pub pdf: bool,
    /// Tabulate optimal rate and expected value at the optimum against N.
    #[arg(long)]
    pub opt_curve: bool,
    #[arg(long, default_value_t = 401)]
    pub phi_points: usize,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct DescentArgs {
    #[arg(long, value_enum, default_value_t = Profile::Desk)]
    pub profile: Profile,
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long = "M")]
    pub m: Option<usize>,
    /// Starting points per learning rate.
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long, default_value = "0.1opt,0.25opt,0.5opt,0.75opt,opt,1.25opt,1.5opt,2opt,3opt,5opt")]
    pub etas: String,
    /// `scaled` takes rates from `--X` as `η = X/√N`.
    #[arg(long, value_enum, default_value_t = EtaMode::Absolute)]
    pub eta_mode: EtaMode,
    #[arg(long = "X", value_delimiter = ',')]
    pub x: Vec<f64>,
    /// One field realization for all starting points.
    #[arg(long)]
    pub shared_field: bool,
    #[arg(long, default_value_t = descent::DEFAULT_BOX_HALFWIDTH)]
    pub box_halfwidth: f64,
    /// Learning rate for the empirical-distribution sample.
    #[arg(long, default_value = "0.1opt")]
    pub ecdf_eta: String,
    #[arg(long, default_value_t = 10_000)]
    pub ecdf_points: usize,
    #[arg(long)]
    pub no_ecdf: bool,
    /// Width of the acceptance bands in standard errors.
    #[arg(long, default_value_t = 3.0)]
    pub bands: f64,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct EulerArgs {
    #[arg(long = "N", default_value = "100,250,500")]
    pub n: String,
    /// `auto` for [-(√N+15), √N+15], or `lo..hi`.
    #[arg(long, default_value = "auto")]
    pub u_range: String,
    #[arg(long, default_value_t = 601)]
    pub points: usize,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct ClassifyArgs {
    #[arg(value_enum)]
    pub task: Task,
    #[arg(long, value_enum, default_value_t = Profile::Desk)]
    pub profile: Profile,
    /// Parameter dimension.
    #[arg(long = "NP")]
    pub n_p: Option<usize>,
    #[arg(long = "M")]
    pub m: Option<usize>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long, default_value_t = classifier::DEFAULT_BATCH_SIZE)]
    pub batch_size: usize,
    #[arg(long)]
    pub n_train: Option<usize>,
    #[arg(long)]
    pub n_test: Option<usize>,
    #[arg(long, default_value = "data/mnist-subset")]
    pub mnist_dir: PathBuf,
    /// `zero` or `gaussian:<scale>`.
    #[arg(long, default_value = "zero")]
    pub beta_init: String,
    /// Permute training labels (leakage control).
    #[arg(long)]
    pub shuffle_labels: bool,
    /// Run a learning-rate sweep over this grid instead of one training.
    #[arg(long)]
    pub sweep_etas: Option<String>,
    /// Total dimensions for the sweep (defaults to the configured one).
    #[arg(long)]
    pub sweep_n: Option<String>,
    /// Exit with code 1 if the final test accuracy is below this.
    #[arg(long)]
    pub min_accuracy: Option<f64>,
    /// Also write the field snapshot here.
    #[arg(long)]
    pub save_field: Option<PathBuf>,
    /// Write the normalized train and test sets as CSV.
    #[arg(long)]
    pub export_dataset: bool,
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn parse_f64(s: &str) -> Result<f64, Failure> {
    s.trim().parse::<f64>().map_err(|_| usage(format!("not a number: `{s}`")))
}

/// A learning rate: a number, `opt`, or `<k>opt`.
fn parse_eta(s: &str, n: usize) -> Result<f64, Failure> {
    let s = s.trim();
    let eta = match s.strip_suffix("opt") {
        Some("") => theory::optimal_eta(n),
        Some(k) => parse_f64(k)? * theory::optimal_eta(n),
        None => parse_f64(s)?,
    };
    if !(eta.is_finite() && eta >= 0.0) {
        return Err(usage(format!("learning rate must be finite and non-negative: `{s}`")));
    }
    Ok(eta)
}

/// Comma-separated learning rates with labels; `lo..hi:count` expands to
/// `count` evenly spaced values.
pub fn parse_eta_grid(spec: &str, n: usize) -> Result<Vec<(String, f64)>, Failure> {
    let mut out = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((range, count)) = item.split_once(':') {
            let (lo, hi) = range.split_once("..").ok_or_else(|| usage(format!("bad range `{item}`")))?;
            let (lo, hi) = (parse_eta(lo, n)?, parse_eta(hi, n)?);
            let count: usize = count.trim().parse().map_err(|_| usage(format!("bad count in `{item}`")))?;
            if count < 2 || !(lo < hi) {
                return Err(usage(format!("range `{item}` needs lo < hi and at least two points")));
            }
            let step = (hi - lo) / (count - 1) as f64;
            out.extend((0..count).map(|i| {
                let v = if i + 1 == count { hi } else { lo + step * i as f64 };
                (format!("{v:?}"), v)
            }));
        } else {
            out.push((item.to_string(), parse_eta(item, n)?));
        }
    }
    if out.is_empty() {
        return Err(usage("learning-rate grid is empty"));
    }
    Ok(out)
}

/// `a`, `a..b` (inclusive) or `a..b:step`, comma-separated.
pub fn parse_n_grid(spec: &str) -> Result<Vec<usize>, Failure> {
    let int = |s: &str| s.trim().parse::<usize>().map_err(|_| usage(format!("not a dimension: `{s}`")));
    let mut out = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item.split_once("..") {
            Some((lo, rest)) => {
                let (hi, step) = match rest.split_once(':') {
                    Some((hi, step)) => (int(hi)?, int(step)?),
                    None => (int(rest)?, 1),
                };
                let lo = int(lo)?;
                if step == 0 || lo > hi {
                    return Err(usage(format!("bad range `{item}`")));
                }
                out.extend((lo..=hi).step_by(step));
            }
            None => out.push(int(item)?),
        }
    }
    if out.is_empty() {
        return Err(usage("dimension grid is empty"));
    }
    if out.contains(&0) {
        return Err(usage("dimensions must be at least 1"));
    }
    Ok(out)
}

fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let step = (hi - lo) / (count - 1) as f64;
    (0..count).map(|i| if i + 1 == count { hi } else { lo + step * i as f64 }).collect()
}

/// What a finished run reports besides its files.
#[derive(Debug, Default)]
pub struct Outcome {
    pub written: Vec<PathBuf>,
    pub lines: Vec<String>,
}

pub fn execute(cli: &Cli) -> Result<Outcome, Failure> {
    match &cli.command {
        Command::Theory(a) => run_theory(cli, a),
        Command::Descent(a) => run_descent(cli, a),
        Command::Euler(a) => run_euler(cli, a),
        Command::Classify(a) => run_classify(cli, a),
    }
}

fn subcommand_path(cli: &Cli) -> &'static str {
    match cli.command {
        Command::Theory(_) => "theory",
        Command::Descent(_) => "descent",
        Command::Euler(_) => "euler",
        Command::Classify(_) => "classify",
    }
}

/// Parses `argv` (including the program name), merges any `--config` file,
/// runs, reports, and returns the process exit code.
pub fn run_from(argv: Vec<OsString>) -> i32 {
    let cli = match parse_with_config(&argv) {
        Ok(cli) => cli,
        Err(ParseError::Clap(e)) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
        Err(ParseError::Failure(f)) => {
            eprintln!("error: {f}");
            return f.exit_code();
        }
    };
    match execute(&cli) {
        Ok(outcome) => {
            for line in &outcome.lines {
                println!("{line}");
            }
            0
        }
        Err(f) => {
            eprintln!("error: {f}");
            f.exit_code()
        }
    }
}

enum ParseError {
    Clap(clap::Error),
    Failure(Failure),
}

fn parse_with_config(argv: &[OsString]) -> Result<Cli, ParseError> {
    let cli = Cli::try_parse_from(argv).map_err(ParseError::Clap)?;
    let Some(path) = config::find_config_flag(argv) else {
        return Ok(cli);
    };
    let entries = config::load(Path::new(&path)).map_err(ParseError::Failure)?;
    let spliced = config::splice(argv, &[subcommand_path(&cli)], config::to_args(&entries));
    Cli::try_parse_from(spliced).map_err(ParseError::Clap)
}

// ---------------------------------------------------------------- theory

#[derive(Debug, Serialize)]
struct TheoryConfig {
    seed: u64,
    dimensions: Vec<usize>,
    etas: Option<String>,
    pdf: bool,
    opt_curve: bool,
    phi_points: usize,
}

fn run_theory(cli: &Cli, a: &TheoryArgs) -> Result<Outcome, Failure> {
    let dims = parse_n_grid(&a.n)?;
    if a.pdf && a.phi_points < 2 {
        return Err(usage("--phi-points must be at least 2"));
    }
    let cfg = TheoryConfig { seed: cli.seed, dimensions: dims.clone(), etas: a.etas.clone(), pdf: a.pdf, opt_curve: a.opt_curve, phi_points: a.phi_points };
    let mut w = ArtifactWriter::new(&cli.out, "theory", cfg);
    let mut outcome = Outcome::default();

    if a.opt_curve {
        let mut t = Table::new(&["N", "eta_opt", "expected_at_opt", "asymptotic", "step_length", "log10_random_search_tries"]);
        for &n in &dims {
            let value = theory::expected_phi1_at_opt(n);
            t.row(&[
                Cell::U(n as u64),
                Cell::F(theory::optimal_eta(n)),
                Cell::F(value),
                Cell::F(theory::expected_phi1_at_opt_asymptotic(n)),
                Cell::F(theory::expected_step_length(n)),
                Cell::F(theory::random_search_expected_tries(value)?.log10_tries),
            ]);
        }
        outcome.written.push(w.write_table("opt_curve.csv", &t)?);
    }

    if a.pdf {
        for &n in &dims {
            let etas = parse_eta_grid(a.etas.as_deref().unwrap_or("0.5opt,opt,2opt"), n)?;
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for (_, eta) in &etas {
                let (m, s) = (theory::expected_phi1(*eta, n)?, theory::var_phi1(*eta, n)?.sqrt());
                lo = lo.min(m - 6.0 * s);
                hi = hi.max(m + 6.0 * s);
            }
            let mut header = vec!["phi1".to_string()];
            header.extend(etas.iter().map(|(label, _)| format!("pdf_{label}")));
            let mut t = Table::new(&header);
            for phi in linspace(lo, hi, a.phi_points) {
                let mut row = vec![Cell::F(phi)];
                for (_, eta) in &etas {
                    row.push(Cell::F(theory::pdf_phi1(phi, *eta, n)?));
                }
                t.row(&row);
            }
            outcome.written.push(w.write_table(&format!("pdf_N{n}.csv"), &t)?);
        }
    }

    if !a.pdf && !a.opt_curve {
        for &n in &dims {
            let etas = parse_eta_grid(a.etas.as_deref().unwrap_or("0..4opt:201"), n)?;
            let grid: Vec<f64> = etas.iter().map(|(_, e)| *e).collect();
            let curve = theory::TheoryCurve::over_eta(n, &grid)?;
            let mut t = Table::new(&["param", "mean_theory", "var_theory"]);
            for ((eta, m), v) in curve.grid.iter().zip(&curve.mean).zip(&curve.variance) {
                t.row(&[Cell::F(*eta), Cell::F(*m), Cell::F(*v)]);
            }
            outcome.written.push(w.write_table(&format!("theory_curve_N{n}.csv"), &t)?);
        }
    }
    outcome.lines.extend(outcome.written.iter().map(|p| format!("wrote {}", p.display())));
    Ok(outcome)
}

// ---------------------------------------------------------------- descent

#[derive(Debug, Serialize)]
struct DescentConfig {
    seed: u64,
    profile: Profile,
    n: usize,
    m: usize,
    points: usize,
    etas: Vec<f64>,
    field_mode: &'static str,
    box_halfwidth: f64,
    ecdf_eta: Option<f64>,
    ecdf_points: usize,
    bands: f64,
}

fn run_descent(cli: &Cli, a: &DescentArgs) -> Result<Outcome, Failure> {
    let profile_run = match a.profile {
        Profile::Desk => DescentRun::desk(0.0, cli.seed),
        Profile::Extended => DescentRun::extended(0.0, cli.seed),
    };
    let n = a.n.unwrap_or(profile_run.n);
    let m = a.m.unwrap_or(if a.n.is_some() { 40 * n } else { profile_run.m });
    let base = DescentRun {
        n,
        m,
        num_points: a.points.unwrap_or(profile_run.num_points),
        box_halfwidth: a.box_halfwidth,
        field_mode: if a.shared_field { FieldMode::Shared } else { FieldMode::FreshPerPoint },
        ..profile_run
    };
    base.validate()?;
    let etas: Vec<f64> = match a.eta_mode {
        EtaMode::Absolute => parse_eta_grid(&a.etas, n)?.into_iter().map(|(_, e)| e).collect(),
        EtaMode::Scaled => {
            if a.x.is_empty() {
                return Err(usage("--eta-mode scaled needs --X values"));
            }
            a.x.iter().map(|&x| theory::eta_from_scaled(x, n)).collect()
        }
    };
    if etas.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
        return Err(usage("learning rates must be finite and non-negative"));
    }
    let ecdf_eta = if a.no_ecdf { None } else { Some(parse_eta(&a.ecdf_eta, n)?) };
    let cfg = DescentConfig {
        seed: cli.seed,
        profile: a.profile,
        n,
        m: base.m,
        points: base.num_points,
        etas: etas.clone(),
        field_mode: if a.shared_field { "shared" } else { "fresh-per-point" },
        box_halfwidth: a.box_halfwidth,
        ecdf_eta,
        ecdf_points: a.ecdf_points,
        bands: a.bands,
    };
    let mut w = ArtifactWriter::new(&cli.out, "descent", cfg);
    let mut outcome = Outcome::default();

    let reports = descent::moment_sweep(&SweepConfig { base: base.clone(), etas })?;
    let mut t = Table::new(&["eta", "sample_mean", "sample_var", "theory_mean", "theory_var", "se_mean"]);
    let mut violations = Vec::new();
    for r in &reports {
        t.row(&[
            Cell::F(r.eta),
            Cell::F(r.sample_mean),
            Cell::F(r.sample_var),
            Cell::F(r.theory_mean),
            Cell::F(r.theory_var),
            Cell::F(r.standard_error_mean),
        ]);
        let line = format!(
            "eta {:.6}: mean {:+.3} se, var {:+.3} se",
            r.eta,
            (r.sample_mean - r.theory_mean) / r.standard_error_mean,
            (r.sample_var - r.theory_var) / r.standard_error_var
        );
        if !r.within_bands(a.bands) {
            violations.push(line.clone());
        }
        outcome.lines.push(line);
    }
    outcome.written.push(w.write_table("descent_sweep.csv", &t)?);

    if let Some(eta) = ecdf_eta {
        let run = DescentRun { eta, num_points: a.ecdf_points, seed: grf_core::rng::derive_seed(cli.seed, grf_core::rng::tag::ECDF, 0), ..base };
        let (ks, sample) = descent::ecdf_experiment(&run)?;
        let mut t = Table::new(&["phi1"]);
        for v in &sample {
            t.row(&[Cell::F(*v)]);
        }
        outcome.written.push(w.write_table("ecdf_phi1.csv", &t)?);
        let mut k = Table::new(&["eta", "points", "ks_statistic", "critical_1pct", "reference_mean", "reference_std"]);
        k.row(&[
            Cell::F(eta),
            Cell::U(ks.sample_size as u64),
            Cell::F(ks.statistic),
            Cell::F(ks.critical_1pct),
            Cell::F(ks.reference_mean),
            Cell::F(ks.reference_std),
        ]);
        outcome.written.push(w.write_table("ecdf_ks.csv", &k)?);
        outcome.lines.push(format!("KS statistic at eta {eta:.6}: {:.5} (1% critical {:.5})", ks.statistic, ks.critical_1pct));
    }
    if !violations.is_empty() {
        return Err(Failure::Band(format!("{} of {} rows outside {} standard errors:\n{}", violations.len(), reports.len(), a.bands, violations.join("\n"))));
    }
    Ok(outcome)
}

// ---------------------------------------------------------------- euler

#[derive(Debug, Serialize)]
struct EulerConfig {
    seed: u64,
    dimensions: Vec<usize>,
    u_range: String,
    points: usize,
}

fn run_euler(cli: &Cli, a: &EulerArgs) -> Result<Outcome, Failure> {
    let dims = parse_n_grid(&a.n)?;
    if a.points < 2 {
        return Err(usage("--points must be at least 2"));
    }
    let fixed_range = match a.u_range.trim() {
        "auto" => None,
        spec => {
            let (lo, hi) = spec.split_once("..").ok_or_else(|| usage(format!("bad --u-range `{spec}`")))?;
            let (lo, hi) = (parse_f64(lo)?, parse_f64(hi)?);
            if !(lo < hi) {
                return Err(usage("--u-range needs lo < hi"));
            }
            Some((lo, hi))
        }
    };
    let mut w = ArtifactWriter::new(&cli.out, "euler", EulerConfig { seed: cli.seed, dimensions: dims.clone(), u_range: a.u_range.clone(), points: a.points });
    let mut outcome = Outcome::default();
    let mut summary = Table::new(&["N", "u_star", "asymptotic", "gd_value", "ratio"]);
    for &n in &dims {
        let (lo, hi) = fixed_range.unwrap_or_else(|| excursion::limit_window(n));
        let curve = EulerCurve::over(n, linspace(lo, hi, a.points))?;
        let mut t = Table::new(&["u", "expected_chi"]);
        for (u, chi) in curve.u_grid.iter().zip(&curve.chi) {
            t.row(&[Cell::F(*u), Cell::F(*chi)]);
        }
        outcome.written.push(w.write_table(&format!("euler_curve_N{n}.csv"), &t)?);
        let min = excursion::expected_min(n)?;
        let gd = theory::expected_phi1_at_opt(n);
        let ratio = min.u_star / gd;
        summary.row(&[Cell::U(n as u64), Cell::F(min.u_star), Cell::F(min.asymptotic), Cell::F(gd), Cell::F(ratio)]);
        outcome.lines.push(format!("N = {n}: u* = {:.4}, -sqrt(N) = {:.4}, ratio to one-step optimum {:.4}", min.u_star, min.asymptotic, ratio));
    }
    outcome.written.push(w.write_table("euler_summary.csv", &summary)?);
    Ok(outcome)
}

// ---------------------------------------------------------------- classify

#[derive(Debug, Clone, Serialize)]
struct ClassifyConfig {
    seed: u64,
    task: Task,
    profile: Profile,
    n_p: usize,
    n_i: usize,
    m: usize,
    eta: f64,
    epochs: usize,
    batch_size: usize,
    n_train: usize,
    n_test: usize,
    beta_init: String,
    shuffle_labels: bool,
    mnist_dir: Option<String>,
    sweep_etas: Option<String>,
    sweep_n: Option<String>,
}

#[derive(Debug, Serialize)]
struct FieldReference {
    dimension: usize,
    spectral_samples: usize,
    seed: u64,
    fingerprint: String,
    snapshot: Option<String>,
}

#[derive(Debug, Serialize)]
struct SavedState<'a> {
    beta: &'a [f64],
    field: FieldReference,
    final_test_accuracy: Option<f64>,
    normalization_mean_norm: Option<f64>,
}

fn parse_beta_init(s: &str) -> Result<BetaInit, Failure> {
    match s.trim() {
        "zero" => Ok(BetaInit::Zero),
        other => match other.strip_prefix("gaussian:") {
            Some(scale) => {
                let scale = parse_f64(scale)?;
                if !(scale.is_finite() && scale > 0.0) {
                    return Err(usage("gaussian init scale must be positive"));
                }
                Ok(BetaInit::Gaussian { scale })
            }
            None => Err(usage(format!("--beta-init must be `zero` or `gaussian:<scale>`, got `{other}`"))),
        },
    }
}

struct TaskDefaults {
    n_p: usize,
    m: usize,
    eta: f64,
    epochs: usize,
    n_train: usize,
    n_test: usize,
}

fn task_defaults(task: Task, profile: Profile) -> TaskDefaults {
    match (task, profile) {
        (Task::Sine, _) => TaskDefaults {
            n_p: 498,
            m: fieldsim::DEFAULT_SPECTRAL_SAMPLES,
            eta: 0.01,
            epochs: classifier::DEFAULT_EPOCHS,
            n_train: datasets::SINE_TRAIN_SIZE,
            n_test: datasets::SINE_TEST_SIZE,
        },
        (Task::Mnist, Profile::Desk) => {
            TaskDefaults { n_p: 500, m: 10_000, eta: 0.01, epochs: 3, n_train: 10_000, n_test: 10_000 }
        }
        (Task::Mnist, Profile::Extended) => TaskDefaults {
            n_p: 5000,
            m: fieldsim::default_spectral_samples(5000 + 28 * 28),
            eta: 0.01,
            epochs: classifier::DEFAULT_EPOCHS,
            n_train: 60_000,
            n_test: 10_000,
        },
    }
}

fn load_task_data(cli: &Cli, a: &ClassifyArgs, d: &TaskDefaults) -> Result<(Dataset, Dataset), Failure> {
    let n_train = a.n_train.unwrap_or(d.n_train);
    let n_test = a.n_test.unwrap_or(d.n_test);
    let (train, test) = match a.task {
        Task::Sine => datasets::gen_sine(n_train, n_test, cli.seed)?,
        Task::Mnist => {
            let train = mnist::load_mnist_dir(&a.mnist_dir, Split::Train)?;
            let test = mnist::load_mnist_dir(&a.mnist_dir, Split::Test)?;
            (train.head(n_train), test.head(n_test))
        }
    };
    let train = if a.shuffle_labels { train.with_shuffled_labels(cli.seed) } else { train };
    Ok(datasets::normalize(&train, &test)?)
}

fn run_classify(cli: &Cli, a: &ClassifyArgs) -> Result<Outcome, Failure> {
    let d = task_defaults(a.task, a.profile);
    let beta_init = parse_beta_init(&a.beta_init)?;
    let (train, test) = load_task_data(cli, a, &d)?;
    let n_p = a.n_p.unwrap_or(d.n_p);
    let n_i = train.dimension();
    let config = ClassifierConfig {
        n_p,
        n_i,
        m: a.m.unwrap_or(d.m),
        eta: a.eta.unwrap_or(d.eta),
        batch_size: a.batch_size,
        epochs: a.epochs.unwrap_or(d.epochs),
        seed: cli.seed,
        beta_init,
    };
    config.validate()?;
    let cfg = ClassifyConfig {
        seed: cli.seed,
        task: a.task,
        profile: a.profile,
        n_p,
        n_i,
        m: config.m,
        eta: config.eta,
        epochs: config.epochs,
        batch_size: config.batch_size,
        n_train: train.len(),
        n_test: test.len(),
        beta_init: a.beta_init.clone(),
        shuffle_labels: a.shuffle_labels,
        mnist_dir: (a.task == Task::Mnist).then(|| a.mnist_dir.display().to_string()),
        sweep_etas: a.sweep_etas.clone(),
        sweep_n: a.sweep_n.clone(),
    };
    let task = match a.task {
        Task::Sine => "sine",
        Task::Mnist => "mnist",
    };
    let mut w = ArtifactWriter::new(&cli.out, "classify", cfg);
    let mut outcome = Outcome::default();

    if a.export_dataset {
        outcome.written.push(w.write_table(&format!("{task}_train_normalized.csv"), &dataset_table(&train))?);
        outcome.written.push(w.write_table(&format!("{task}_test_normalized.csv"), &dataset_table(&test))?);
    }

    if let Some(spec) = &a.sweep_etas {
        let dims = match &a.sweep_n {
            Some(s) => parse_n_grid(s)?,
            None => vec![config.dimension()],
        };
        let etas: Vec<f64> = parse_eta_grid(spec, config.dimension())?.into_iter().map(|(_, e)| e).collect();
        let sweep = classifier::lr_sweep(&config, &etas, &dims, &train, &test)?;
        let mut t = Table::new(&["N", "eta", "accuracy"]);
        for r in &sweep.rows {
            t.row(&[Cell::U(r.n as u64), Cell::F(r.eta), Cell::F(r.accuracy)]);
        }
        outcome.written.push(w.write_table(&format!("{task}_lr_sweep.csv"), &t)?);
        let mut c = Table::new(&["N", "critical_eta"]);
        for (n, eta) in &sweep.critical {
            c.row(&[Cell::U(*n as u64), eta.map_or(Cell::S("NA".into()), Cell::F)]);
            outcome.lines.push(format!("N = {n}: critical eta {}", eta.map_or("not reached".into(), |e| format!("{e}"))));
        }
        outcome.written.push(w.write_table(&format!("{task}_critical_eta.csv"), &c)?);
        return Ok(outcome);
    }

    let field = Arc::new(config.build_field()?);
    let state: ClassifierState = classifier::train_with_field(&config, field.clone(), &train, &test)?;

    let mut loss = Table::new(&["epoch", "batch", "mean_loss"]);
    for b in &state.history.batch_losses {
        loss.row(&[Cell::U(b.epoch as u64), Cell::U(b.batch as u64), Cell::F(b.mean_loss)]);
    }
    outcome.written.push(w.write_table(&format!("{task}_training_loss.csv"), &loss)?);
    let mut acc = Table::new(&["epoch", "test_accuracy"]);
    for e in &state.history.test_accuracy {
        acc.row(&[Cell::U(e.epoch as u64), Cell::F(e.test_accuracy)]);
    }
    outcome.written.push(w.write_table(&format!("{task}_test_accuracy.csv"), &acc)?);

    if let Some(path) = &a.save_field {
        crate::io::save_snapshot(path, &field)?;
    }
    let saved = SavedState {
        beta: &state.beta,
        field: FieldReference {
            dimension: field.dimension(),
            spectral_samples: field.spectral_samples(),
            seed: field.seed(),
            fingerprint: format!("{:016x}", field.fingerprint()),
            snapshot: a.save_field.as_ref().map(|p| p.display().to_string()),
        },
        final_test_accuracy: state.history.final_accuracy(),
        normalization_mean_norm: train.normalization().map(|n| n.mean_norm),
    };
    let mut json = serde_json::to_vec_pretty(&saved).expect("state serializes");
    json.push(b'\n');
    outcome.written.push(w.write(&format!("{task}_state.json"), &json)?);

    let final_accuracy = state.history.final_accuracy().unwrap_or(0.0);
    outcome.lines.push(format!("{task}: final test accuracy {final_accuracy:.4}"));
    if let Some(min) = a.min_accuracy {
        if final_accuracy < min {
            return Err(Failure::Band(format!("final test accuracy {final_accuracy:.4} is below {min}")));
        }
    }
    Ok(outcome)
}
