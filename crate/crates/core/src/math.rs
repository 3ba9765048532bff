//! Scalar special functions shared by the analytic modules.
//!
//! Elementary functions go through [`libm`] so the crate builds without `std`;
//! with the `std` feature the hot trigonometric path uses the platform
//! implementation instead.

use core::f64::consts::{LN_2, PI, SQRT_2};

pub(crate) const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn ln_1p(x: f64) -> f64 {
    libm::log1p(x)
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[cfg(feature = "std")]
#[inline]
pub(crate) fn sin_cos(x: f64) -> (f64, f64) {
    x.sin_cos()
}

#[cfg(not(feature = "std"))]
#[inline]
pub(crate) fn sin_cos(x: f64) -> (f64, f64) {
    libm::sincos(x)
}

/// Natural log of the gamma function for positive arguments.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma_r(x).0
}

/// `ln C(n, k)` via log-gamma.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    exp(-0.5 * x * x - LN_SQRT_2PI)
}

/// Standard normal CDF through the complementary error function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// `ln Φ(x)`, accurate far into the lower tail.
///
/// For `x < 0` the Mills ratio is evaluated with Laplace's continued fraction,
/// so the result never passes through the (possibly underflowing) CDF value.
pub fn ln_normal_cdf(x: f64) -> f64 {
    if x >= 0.0 {
        ln_1p(-0.5 * libm::erfc(x / SQRT_2))
    } else {
        -0.5 * x * x - LN_SQRT_2PI + ln(mills_ratio(-x))
    }
}

/// Mills ratio `R(t) = (1 - Φ(t)) / φ(t)` for `t > 0`, modified Lentz evaluation
/// of `1/(t + 1/(t + 2/(t + 3/(t + ...))))`.
fn mills_ratio(t: f64) -> f64 {
    if t < 0.5 {
        // The fraction converges slowly near the origin.
        return 0.5 * libm::erfc(t / SQRT_2) / normal_pdf(t);
    }
    const TINY: f64 = 1e-300;
    let mut f = t;
    let mut c = t;
    let mut d = 0.0;
    for k in 1..20_000 {
        let a = k as f64;
        d = t + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = t + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    1.0 / f
}

/// Density of the chi distribution (square root of a chi-squared variate)
/// with `dof` degrees of freedom.
pub fn chi_pdf(s: f64, dof: u64) -> f64 {
    if s <= 0.0 {
        return if dof == 1 { 2.0 * normal_pdf(0.0) } else { 0.0 };
    }
    let k = dof as f64;
    let log_norm = (1.0 - 0.5 * k) * LN_2 - ln_gamma(0.5 * k);
    exp(log_norm + (k - 1.0) * ln(s) - 0.5 * s * s)
}

/// Volume of the unit ball in `d` dimensions, in log form.
pub fn ln_unit_ball_volume(d: u64) -> f64 {
    0.5 * d as f64 * ln(PI) - ln_gamma(0.5 * d as f64 + 1.0)
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let chunks_a = a.chunks_exact(4);
    let chunks_b = b.chunks_exact(4);
    let tail: f64 = chunks_a
        .remainder()
        .iter()
        .zip(chunks_b.remainder())
        .map(|(x, y)| x * y)
        .sum();
    for (ca, cb) in chunks_a.zip(chunks_b) {
        acc[0] += ca[0] * cb[0];
        acc[1] += ca[1] * cb[1];
        acc[2] += ca[2] * cb[2];
        acc[3] += ca[3] * cb[3];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
