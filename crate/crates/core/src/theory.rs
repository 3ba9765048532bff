//! Closed-form statistics of one gradient-descent step on the unit
//! squared-exponential Gaussian random field.
//!
//! Notation: `phi0`/`phi1` are the field values before and after the step
//! `x1 = x0 - eta * grad(x0)`, and `xi0_sq` is the squared gradient norm at
//! `x0`. For a stationary field `phi0 ~ N(0, 1)` and `xi0_sq ~ chi²_N`
//! independently, so every moment below is an expectation over those two.

use alloc::vec::Vec;
use core::f64::consts::LN_10;

use crate::error::{check_dimension, check_finite, check_non_negative, Result};
use crate::math::{self, exp, ln_1p, sqrt};
use crate::quadrature::{self, Tolerance};

/// Squared-exponential correlation with unit length scale and unit variance.
#[inline]
pub fn kernel(r: f64) -> f64 {
    exp(-0.5 * r * r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KernelSpec {
    dimension: usize,
}

impl KernelSpec {
    pub fn new(dimension: usize) -> Result<Self> {
        check_dimension(dimension)?;
        Ok(Self { dimension })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn correlation(&self, r: f64) -> f64 {
        kernel(r)
    }
}

/// Dense symmetric matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    order: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    fn zeros(order: usize) -> Self {
        Self { order, data: alloc::vec![0.0; order * order] }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.order + col]
    }

    fn set_pair(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.order + col] = value;
        self.data[col * self.order + row] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Joint covariance of the stacked vector `(Phi0, Xi0, Phi1, Xi1)` of order
/// `2N + 2`, where `delta_x = x1 - x0`.
///
/// The diagonal blocks are identities. The off-diagonal block
/// `Cov((Phi0, Xi0), (Phi1, Xi1))` is
///
/// ```text
/// exp(-|dx|²/2) * ( I - [[0, dxᵀ], [-dx, dx dxᵀ]] )
/// ```
///
/// so conditioning the second half on the first reproduces
/// [`conditional_moments`] with `dx = -eta * Xi0`.
pub fn joint_covariance(delta_x: &[f64]) -> Result<SymmetricMatrix> {
    check_dimension(delta_x.len())?;
    for &d in delta_x {
        check_finite("delta_x", d)?;
    }
    let n = delta_x.len();
    let half = n + 1;
    let mut sigma = SymmetricMatrix::zeros(2 * half);
    for i in 0..2 * half {
        sigma.set_pair(i, i, 1.0);
    }
    let r2: f64 = delta_x.iter().map(|d| d * d).sum();
    let k = exp(-0.5 * r2);
    // Upper-right block entry (i, j) sits at (i, half + j); the lower-left
    // block is its transpose.
    sigma.set_pair(0, half, k);
    for (j, &dj) in delta_x.iter().enumerate() {
        sigma.set_pair(0, half + 1 + j, -k * dj);
        sigma.set_pair(1 + j, half, k * dj);
        for (i, &di) in delta_x.iter().enumerate() {
            let identity = if i == j { 1.0 } else { 0.0 };
            sigma.set_pair(1 + i, half + 1 + j, k * (identity - di * dj));
        }
    }
    Ok(sigma)
}

/// Conditional mean and variance of `Phi1` given `Phi0` and the squared
/// gradient norm at `x0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalMoments {
    pub mean: f64,
    pub variance: f64,
}

pub fn conditional_moments(phi0: f64, xi0_sq: f64, eta: f64) -> Result<ConditionalMoments> {
    check_finite("phi0", phi0)?;
    check_non_negative("xi0_sq", xi0_sq)?;
    check_non_negative("eta", eta)?;
    let a = eta * eta * xi0_sq;
    if !a.is_finite() {
        return Ok(ConditionalMoments { mean: 0.0, variance: 1.0 });
    }
    let decay = exp(-0.5 * a);
    let mean = decay * (phi0 - eta * xi0_sq);
    let variance = (1.0 - decay * decay * (1.0 + a)).max(0.0);
    Ok(ConditionalMoments { mean, variance })
}

/// `E[Phi1] = -N eta (1 + eta²)^(-N/2 - 1)`.
pub fn expected_phi1(eta: f64, n: usize) -> Result<f64> {
    check_non_negative("eta", eta)?;
    check_dimension(n)?;
    if eta == 0.0 {
        return Ok(0.0);
    }
    let nf = n as f64;
    Ok(-nf * eta * exp((-0.5 * nf - 1.0) * ln_1p(eta * eta)))
}

/// `Var(Phi1) = 1 + N eta² (1 + 2eta²)^(-N/2-2) (N + 1 - 2eta²) - N² eta² (1 + eta²)^(-N-2)`.
pub fn var_phi1(eta: f64, n: usize) -> Result<f64> {
    check_non_negative("eta", eta)?;
    check_dimension(n)?;
    if eta == 0.0 {
        return Ok(1.0);
    }
    let nf = n as f64;
    let e2 = eta * eta;
    let first = nf * e2 * exp((-0.5 * nf - 2.0) * ln_1p(2.0 * e2)) * (nf + 1.0 - 2.0 * e2);
    let second = nf * nf * e2 * exp((-nf - 2.0) * ln_1p(e2));
    Ok(1.0 + first - second)
}

/// Range of the gradient norm `|Xi0|` that carries all but a negligible
/// fraction of the chi distribution with `n` degrees of freedom.
pub fn gradient_norm_window(n: usize) -> (f64, f64) {
    let nf = n as f64;
    let spread = 12.0 * sqrt(2.0 * nf);
    let lo_sq = (nf - spread).max(0.0);
    let hi_sq = nf + spread;
    let root = sqrt(nf);
    let lo = sqrt(lo_sq).min((root - 10.0).max(0.0));
    let hi = sqrt(hi_sq).max(root + 10.0);
    (lo, hi)
}

/// Density of `Phi1` at `phi1`.
///
/// Given the gradient norm `s = |Xi0|`, `Phi1` is Gaussian with mean
/// `-eta s² exp(-eta² s²/2)` and variance `1 - eta² s² exp(-eta² s²)` (the
/// `Phi0` integral is done analytically), so only the integral against the
/// chi density of `s` is numerical.
pub fn pdf_phi1(phi1: f64, eta: f64, n: usize) -> Result<f64> {
    check_non_negative("eta", eta)?;
    check_dimension(n)?;
    check_finite("phi1", phi1)?;
    if eta == 0.0 {
        return Ok(math::normal_pdf(phi1));
    }
    let (lo, hi) = gradient_norm_window(n);
    let chi = ChiDensity::new(n);
    let e2 = eta * eta;
    let integrand = |s: f64| {
        let s2 = s * s;
        let a = e2 * s2;
        let decay = exp(-0.5 * a);
        let mean = -eta * s2 * decay;
        let var = 1.0 - a * decay * decay;
        let z = (phi1 - mean) / sqrt(var);
        chi.eval(s) * math::normal_pdf(z) / sqrt(var)
    };
    let tol = Tolerance { abs: 1e-14, rel: 1e-10, max_intervals: 4000 };
    Ok(quadrature::integrate(integrand, lo, hi, tol)?.value.max(0.0))
}

struct ChiDensity {
    dof: f64,
    log_norm: f64,
}

impl ChiDensity {
    fn new(dof: usize) -> Self {
        let k = dof as f64;
        Self { dof: k, log_norm: (1.0 - 0.5 * k) * core::f64::consts::LN_2 - math::ln_gamma(0.5 * k) }
    }

    fn eval(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return if self.dof == 1.0 { exp(self.log_norm) } else { 0.0 };
        }
        exp(self.log_norm + (self.dof - 1.0) * math::ln(s) - 0.5 * s * s)
    }
}

/// Learning rate minimizing `E[Phi1]`: `(N + 1)^(-1/2)`.
pub fn optimal_eta(n: usize) -> f64 {
    assert!(n >= 1, "dimension must be positive");
    1.0 / sqrt(n as f64 + 1.0)
}

/// `E[Phi1]` at the optimal learning rate,
/// `-N (N+1)^(-1/2) ((N+2)/(N+1))^(-N/2-1)`.
pub fn expected_phi1_at_opt(n: usize) -> f64 {
    assert!(n >= 1, "dimension must be positive");
    let nf = n as f64;
    -nf / sqrt(nf + 1.0) * exp((-0.5 * nf - 1.0) * ln_1p(1.0 / (nf + 1.0)))
}

/// Leading-order behaviour of [`expected_phi1_at_opt`]: `-sqrt(N/e)`.
pub fn expected_phi1_at_opt_asymptotic(n: usize) -> f64 {
    -sqrt(n as f64 / core::f64::consts::E)
}

/// Expected step length `eta_opt * E|Xi0|` at the optimal learning rate.
pub fn expected_step_length(n: usize) -> f64 {
    assert!(n >= 1, "dimension must be positive");
    let nf = n as f64;
    let log_ratio = math::ln_gamma(0.5 * nf + 0.5) - math::ln_gamma(0.5 * nf);
    core::f64::consts::SQRT_2 * exp(log_ratio) / sqrt(nf + 1.0)
}

/// Expected number of independent field evaluations needed for random search
/// to reach `value` or lower.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchTries {
    /// `ln Φ(value)`, always finite for finite `value`.
    pub ln_probability: f64,
    /// `1 / Φ(value)`; `+inf` once it leaves the f64 range.
    pub tries: f64,
    pub log10_tries: f64,
}

pub fn random_search_expected_tries(value: f64) -> Result<SearchTries> {
    check_finite("value", value)?;
    let ln_probability = math::ln_normal_cdf(value);
    // The direct reciprocal is exact where Φ is comfortably representable.
    let tries = if value > -37.0 { random_search_tries_direct(value) } else { exp(-ln_probability) };
    Ok(SearchTries { ln_probability, tries, log10_tries: -ln_probability / LN_10 })
}

/// `1 / Φ(value)` from the complementary error function.
pub fn random_search_tries_direct(value: f64) -> f64 {
    1.0 / math::normal_cdf(value)
}

/// `1 / Φ(value)` through the log-scale tail evaluation.
pub fn random_search_tries_log_path(value: f64) -> f64 {
    exp(-math::ln_normal_cdf(value))
}

/// Large-`N` normal limit parameters for the rescaled rate `eta = X / sqrt(N)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticParams {
    pub x: f64,
    /// `-sqrt(N) X exp(-X²/2)`
    pub mu_n: f64,
    /// `1 + X² exp(-X²)`
    pub sigma2: f64,
}

pub fn asymptotic_params(x: f64, n: usize) -> Result<AsymptoticParams> {
    check_non_negative("X", x)?;
    check_dimension(n)?;
    let mu_n = if x == 0.0 { 0.0 } else { -sqrt(n as f64) * x * exp(-0.5 * x * x) };
    let sigma2 = 1.0 + x * x * exp(-x * x);
    Ok(AsymptoticParams { x, mu_n, sigma2 })
}

/// Learning rate for a rescaled rate `X` in dimension `N`.
pub fn eta_from_scaled(x: f64, n: usize) -> f64 {
    x / sqrt(n as f64)
}

/// Closed-form mean and variance of `Phi1` tabulated over a learning-rate grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoryCurve {
    pub n: usize,
    pub grid: Vec<f64>,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
}

impl TheoryCurve {
    pub fn over_eta(n: usize, etas: &[f64]) -> Result<Self> {
        let mut mean = Vec::with_capacity(etas.len());
        let mut variance = Vec::with_capacity(etas.len());
        for &eta in etas {
            mean.push(expected_phi1(eta, n)?);
            variance.push(var_phi1(eta, n)?);
        }
        Ok(Self { n, grid: etas.to_vec(), mean, variance })
    }
}
