//! Monte Carlo ensembles of a single gradient step on simulated fields.

use alloc::vec::Vec;

use rand::Rng;

use crate::error::{check_dimension, check_non_negative, Error, Result};
use crate::exec;
use crate::fieldsim::SpectralField;
use crate::math::{self, sqrt};
use crate::rng::{derive_seed, derived_rng, tag};
use crate::stats;
use crate::theory;

/// How ensemble members obtain their field realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FieldMode {
    /// Every starting point gets an independent realization, so samples are
    /// i.i.d. and Monte Carlo bands are valid.
    #[default]
    FreshPerPoint,
    /// All points of a run share one realization.
    Shared,
}

/// One ensemble configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct DescentRun {
    pub n: usize,
    pub m: usize,
    pub eta: f64,
    pub num_points: usize,
    pub box_halfwidth: f64,
    pub seed: u64,
    pub field_mode: FieldMode,
}

pub const DEFAULT_BOX_HALFWIDTH: f64 = 1e6;

impl DescentRun {
    /// Desk-scale defaults: `N = 100`, `M = 4000`, 2000 points.
    pub fn desk(eta: f64, seed: u64) -> Self {
        Self {
            n: 100,
            m: 4000,
            eta,
            num_points: 2000,
            box_halfwidth: DEFAULT_BOX_HALFWIDTH,
            seed,
            field_mode: FieldMode::FreshPerPoint,
        }
    }

    /// Full-scale configuration: `N = 500`, `M = 20 000`, 10⁴ points.
    pub fn extended(eta: f64, seed: u64) -> Self {
        Self { n: 500, m: 20_000, num_points: 10_000, ..Self::desk(eta, seed) }
    }

    pub fn validate(&self) -> Result<()> {
        check_dimension(self.n)?;
        if self.m <= self.n {
            return Err(Error::TooFewSpectralSamples { n: self.n, m: self.m });
        }
        if self.num_points == 0 {
            return Err(Error::InvalidArgument("ensemble needs at least one point"));
        }
        check_non_negative("eta", self.eta)?;
        if !(self.box_halfwidth.is_finite() && self.box_halfwidth > 0.0) {
            return Err(Error::InvalidArgument("box half-width must be positive and finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub phi0: f64,
    pub phi1: f64,
    pub step_len: f64,
    pub grad_norm_sq: f64,
}

/// `x1 = x0 - eta ∇phi(x0)`; returns the values at both points and `|x1 - x0|`.
pub fn single_step(field: &SpectralField, x0: &[f64], eta: f64) -> Result<StepOutcome> {
    check_non_negative("eta", eta)?;
    let (phi0, grad) = field.eval_with_grad(x0)?;
    let grad_norm_sq: f64 = grad.iter().map(|g| g * g).sum();
    let x1: Vec<f64> = x0.iter().zip(&grad).map(|(x, g)| x - eta * g).collect();
    let phi1 = if eta == 0.0 { phi0 } else { field.eval(&x1)? };
    Ok(StepOutcome { phi0, phi1, step_len: eta * sqrt(grad_norm_sq), grad_norm_sq })
}

fn starting_point(run: &DescentRun, member: usize) -> Vec<f64> {
    let mut rng = derived_rng(run.seed, tag::MEMBER, member as u64);
    let w = run.box_halfwidth;
    (0..run.n).map(|_| rng.random_range(-w..=w)).collect()
}

/// Runs the ensemble of `run.num_points` single steps, in member order.
pub fn ensemble(run: &DescentRun) -> Result<Vec<StepOutcome>> {
    run.validate()?;
    let shared = match run.field_mode {
        FieldMode::Shared => Some(SpectralField::build(run.n, run.m, derive_seed(run.seed, tag::SHARED_FIELD, 0))?),
        FieldMode::FreshPerPoint => None,
    };
    exec::map_indexed(run.num_points, |i| {
        let x0 = starting_point(run, i);
        match &shared {
            Some(field) => single_step(field, &x0, run.eta),
            None => {
                let field = SpectralField::build(run.n, run.m, derive_seed(run.seed, tag::MEMBER_FIELD, i as u64))?;
                single_step(&field, &x0, run.eta)
            }
        }
    })
    .into_iter()
    .collect()
}

/// Sample statistics of `Phi1` for one learning rate next to the closed forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentReport {
    pub eta: f64,
    pub num_points: usize,
    pub sample_mean: f64,
    pub sample_var: f64,
    pub theory_mean: f64,
    pub theory_var: f64,
    /// `sample_std / sqrt(num_points)`
    pub standard_error_mean: f64,
    pub standard_error_var: f64,
}

impl MomentReport {
    pub fn from_samples(eta: f64, n: usize, phi1: &[f64]) -> Result<Self> {
        let summary = stats::summarize(phi1).ok_or(Error::InvalidArgument("need at least two samples"))?;
        Ok(Self {
            eta,
            num_points: phi1.len(),
            sample_mean: summary.mean,
            sample_var: summary.variance,
            theory_mean: theory::expected_phi1(eta, n)?,
            theory_var: theory::var_phi1(eta, n)?,
            standard_error_mean: summary.se_mean,
            standard_error_var: summary.se_variance,
        })
    }

    pub fn mean_deviation_in_se(&self) -> f64 {
        (self.sample_mean - self.theory_mean).abs() / self.standard_error_mean
    }

    pub fn var_deviation_in_se(&self) -> f64 {
        (self.sample_var - self.theory_var).abs() / self.standard_error_var
    }

    /// Both mean and variance lie within `k` standard errors of theory.
    pub fn within_bands(&self, k: f64) -> bool {
        self.mean_deviation_in_se() <= k && self.var_deviation_in_se() <= k
    }
}

/// A learning-rate sweep sharing everything but `eta`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub base: DescentRun,
    pub etas: Vec<f64>,
}

impl SweepConfig {
    /// Row `k` runs with its own derived seed so rows are independent.
    pub fn row(&self, k: usize) -> DescentRun {
        DescentRun { eta: self.etas[k], seed: derive_seed(self.base.seed, tag::SWEEP_ROW, k as u64), ..self.base.clone() }
    }
}

pub fn moment_sweep(config: &SweepConfig) -> Result<Vec<MomentReport>> {
    if config.etas.is_empty() {
        return Err(Error::InvalidArgument("learning-rate grid is empty"));
    }
    (0..config.etas.len())
        .map(|k| {
            let run = config.row(k);
            let phi1: Vec<f64> = ensemble(&run)?.iter().map(|s| s.phi1).collect();
            MomentReport::from_samples(run.eta, run.n, &phi1)
        })
        .collect()
}

/// Kolmogorov–Smirnov comparison of simulated `Phi1` values with the normal
/// law carrying the exact closed-form mean and variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsReport {
    pub statistic: f64,
    pub sample_size: usize,
    pub reference_mean: f64,
    pub reference_std: f64,
    pub critical_1pct: f64,
}

pub fn ecdf_experiment(run: &DescentRun) -> Result<(KsReport, Vec<f64>)> {
    if run.num_points < 100 {
        return Err(Error::InvalidArgument("ECDF comparison needs at least 100 points"));
    }
    let phi1: Vec<f64> = ensemble(run)?.iter().map(|s| s.phi1).collect();
    let reference_mean = theory::expected_phi1(run.eta, run.n)?;
    let reference_std = sqrt(theory::var_phi1(run.eta, run.n)?);
    let statistic = stats::ks_statistic(&phi1, |x| math::normal_cdf((x - reference_mean) / reference_std));
    let report = KsReport {
        statistic,
        sample_size: phi1.len(),
        reference_mean,
        reference_std,
        critical_1pct: stats::ks_critical_1pct(phi1.len()),
    };
    Ok((report, phi1))
}

/// Expected value after one optimal step against the random-search effort
/// needed to match it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchComparison {
    pub n: usize,
    pub gd_value: f64,
    pub asymptotic_value: f64,
    pub tries: f64,
    pub tries_direct: f64,
    pub tries_log_path: f64,
    pub log10_tries: f64,
}

pub fn gd_vs_random_search(n: usize) -> Result<SearchComparison> {
    check_dimension(n)?;
    let gd_value = theory::expected_phi1_at_opt(n);
    let tries = theory::random_search_expected_tries(gd_value)?;
    Ok(SearchComparison {
        n,
        gd_value,
        asymptotic_value: theory::expected_phi1_at_opt_asymptotic(n),
        tries: tries.tries,
        tries_direct: theory::random_search_tries_direct(gd_value),
        tries_log_path: theory::random_search_tries_log_path(gd_value),
        log10_tries: tries.log10_tries,
    })
}
