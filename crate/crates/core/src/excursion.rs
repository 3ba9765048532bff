//! Expected Euler characteristic of sublevel sets `{x in B_N : phi(x) <= u}`
//! of the unit ball, and the threshold where it crosses one half.
//!
//! The expectation is `Φ(u) + φ(u) Σ_{j=1..N} c_j He_{j-1}(-u)` with
//! `c_j = L_j (2π)^{-j/2}`. The terms alternate and grow to many orders of
//! magnitude above the result (around `1e72` at `N = 500`, `u = 0`), so the
//! sum runs in binary floating point whose precision is picked from the size
//! of the largest term.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::bigfloat::{self, BigFloat};
use crate::error::{check_dimension, check_finite, Error, Result};
use crate::exec;
use crate::math::{self, exp, ln, ln_binomial, ln_unit_ball_volume, sqrt, LN_SQRT_2PI};

const BASE_PRECISION: u64 = 128;
/// Bits kept below `2^-64` of the final result.
const GUARD_BITS: i64 = 96;
pub const PRECISION_CAP_BITS: u64 = 1 << 16;

/// Half-width beyond `√N` of the window where both limits have been reached.
pub const LIMIT_MARGIN: f64 = 15.0;
pub const SCAN_STEP: f64 = 0.05;
pub const BISECTION_TOLERANCE: f64 = 1e-6;

/// `ln L_j` of the unit ball in `R^N`.
pub fn ln_lipschitz_killing(n: usize, j: usize) -> Result<f64> {
    check_dimension(n)?;
    if j > n {
        return Err(Error::IndexOutOfRange { index: j, max: n });
    }
    let (n, j) = (n as u64, j as u64);
    Ok(ln_binomial(n, j) + ln_unit_ball_volume(n) - ln_unit_ball_volume(n - j))
}

/// `L_j = C(N, j) ω_N / ω_{N-j}`; `L_0 = 1`, `L_N` is the ball volume.
pub fn lipschitz_killing(n: usize, j: usize) -> Result<f64> {
    ln_lipschitz_killing(n, j).map(exp)
}

/// Probabilists' Hermite polynomial by the three-term recurrence.
pub fn hermite_he(n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let next = x * cur - k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `2^{k n} He_n(a / 2^k)` for `n = 0..count`, exactly.
struct ExactHermite {
    a: BigInt,
    shift: u64,
    prev: BigInt,
    cur: BigInt,
    n: u64,
}

impl ExactHermite {
    fn new(x: f64) -> Self {
        let (m, e) = bigfloat::decompose(x);
        let (a, shift) = if e >= 0 { (m << e as u64, 0) } else { (m, (-e) as u64) };
        Self { prev: BigInt::zero(), cur: BigInt::from(1u8), a, shift, n: 0 }
    }

    /// `He_n(x)` for the current `n`, then advances to `n + 1`.
    fn next(&mut self, prec: u64) -> BigFloat {
        let value = BigFloat::from_int(self.cur.clone(), -((self.shift * self.n) as i64), prec);
        let next = &self.a * &self.cur - (&self.prev << (2 * self.shift)) * self.n;
        self.prev = core::mem::replace(&mut self.cur, next);
        self.n += 1;
        value
    }
}

/// `c_1..c_N`, where `c_j = C(N, j) Γ((N-j)/2 + 1) / Γ(N/2 + 1) 2^{-j/2}`.
fn coefficients(n: usize, prec: u64) -> Vec<BigFloat> {
    let n64 = n as u64;
    let m = n64 / 2;
    let pi = bigfloat::pi(prec);
    let c1 = if n.is_multiple_of(2) {
        let central = binomial(2 * m, m);
        let ratio = BigFloat::from_int(central, -2 * m as i64, prec);
        let root = pi.div_u64(2, prec).sqrt(prec);
        ratio.mul(&root, prec).mul_u64(n64, prec)
    } else {
        let num = BigFloat::from_int(BigInt::from(1u8), 2 * (m as i64 + 1), prec);
        let den = BigFloat::from_int(binomial(2 * m + 2, m + 1) * (m + 1), 0, prec);
        let root = pi.mul_u64(2, prec).sqrt(prec);
        num.div(&den, prec).div(&root, prec).mul_u64(n64, prec)
    };
    let mut c = Vec::with_capacity(n + 1);
    c.push(BigFloat::from_u64(1));
    c.push(c1);
    for j in 2..=n {
        let base = &c[j - 2];
        let k = (j - 2) as u64;
        let next = if n64 > k + 1 { base.mul_u64(n64 - k - 1, prec).div_u64((k + 1) * (k + 2), prec) } else { BigFloat::zero() };
        c.push(next);
    }
    c.remove(0);
    c
}

fn binomial(n: u64, k: u64) -> BigInt {
    let mut acc = BigInt::from(1u8);
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// `Σ_j s_j c_j He_{j-1}(x)` with `s_j = (-1)^{j-1}` when `alternate`, and the
/// `floor(log2)` of the largest term.
fn hermite_sum(n: usize, x: f64, alternate: bool, prec: u64) -> (BigFloat, i64) {
    let coeffs = coefficients(n, prec);
    let mut he = ExactHermite::new(x);
    let mut sum = BigFloat::zero();
    let mut largest = i64::MIN;
    for (idx, c) in coeffs.iter().enumerate() {
        let h = he.next(prec);
        let mut term = c.mul(&h, prec);
        if alternate && idx % 2 == 1 {
            term = term.neg();
        }
        if let Some(l) = term.log2_floor() {
            largest = largest.max(l);
        }
        sum = sum.add(&term, prec);
    }
    (sum, largest)
}

/// `φ(u) Σ_j s_j c_j He_{j-1}(x)` in double precision, re-running the sum at
/// higher precision when the largest term calls for it.
fn density_part(n: usize, x: f64, u: f64, alternate: bool) -> Result<f64> {
    let ln_pdf = -0.5 * u * u - LN_SQRT_2PI;
    let log2_pdf = libm::ceil(ln_pdf / core::f64::consts::LN_2) as i64;
    let mut prec = BASE_PRECISION;
    loop {
        let (sum, largest) = hermite_sum(n, x, alternate, prec);
        let required = if largest == i64::MIN { 0 } else { (largest + log2_pdf + GUARD_BITS).max(0) as u64 };
        if required <= prec {
            let (f, e) = sum.to_f64_parts();
            if f == 0.0 {
                return Ok(0.0);
            }
            let magnitude = exp(ln(f.abs()) + e as f64 * core::f64::consts::LN_2 + ln_pdf);
            return Ok(magnitude.copysign(f));
        }
        if required > PRECISION_CAP_BITS {
            return Err(Error::PrecisionLoss { required_bits: required, cap_bits: PRECISION_CAP_BITS });
        }
        prec = required + 32;
    }
}

/// Sublevel Gaussian Minkowski density `ρ_j(u)`: the normal CDF for `j = 0`,
/// otherwise `(2π)^{-(j+1)/2} He_{j-1}(-u) e^{-u²/2}`.
pub fn rho(j: usize, u: f64) -> f64 {
    if j == 0 {
        return math::normal_cdf(u);
    }
    let mut he = ExactHermite::new(-u);
    let mut h = BigFloat::zero();
    for _ in 0..j {
        h = he.next(BASE_PRECISION);
    }
    let (f, e) = h.to_f64_parts();
    if f == 0.0 {
        return 0.0;
    }
    let ln_pre = -0.5 * (j as f64 + 1.0) * ln(2.0 * core::f64::consts::PI) - 0.5 * u * u;
    exp(ln(f.abs()) + e as f64 * core::f64::consts::LN_2 + ln_pre).copysign(f)
}

/// `E[χ({x in B_N : phi(x) <= u})]`.
pub fn expected_euler(n: usize, u: f64) -> Result<f64> {
    check_dimension(n)?;
    check_finite("u", u)?;
    Ok(math::normal_cdf(u) + density_part(n, u, u, true)?)
}

/// `E[χ({x in B_N : phi(x) >= v})]`, summed with unflipped Hermite terms.
/// Equals `expected_euler(n, -v)` by the symmetry of the field.
pub fn expected_euler_superlevel(n: usize, v: f64) -> Result<f64> {
    check_dimension(n)?;
    check_finite("v", v)?;
    let upper_tail = 0.5 * libm::erfc(v / core::f64::consts::SQRT_2);
    Ok(upper_tail + density_part(n, v, v, false)?)
}

/// `[-(√N + 15), √N + 15]`, outside of which the curve has reached its limits.
pub fn limit_window(n: usize) -> (f64, f64) {
    let half = sqrt(n as f64) + LIMIT_MARGIN;
    (-half, half)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EulerCurve {
    pub n: usize,
    pub u_grid: Vec<f64>,
    pub chi: Vec<f64>,
}

impl EulerCurve {
    pub fn over(n: usize, u_grid: Vec<f64>) -> Result<Self> {
        check_dimension(n)?;
        if u_grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument("threshold grid must be strictly ascending"));
        }
        let chi = exec::map_indexed(u_grid.len(), |i| expected_euler(n, u_grid[i])).into_iter().collect::<Result<_>>()?;
        Ok(Self { n, u_grid, chi })
    }

    /// `points` evenly spaced thresholds across [`limit_window`].
    pub fn auto(n: usize, points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::InvalidArgument("curve needs at least two points"));
        }
        let (lo, hi) = limit_window(n);
        let step = (hi - lo) / (points - 1) as f64;
        Self::over(n, (0..points).map(|i| if i + 1 == points { hi } else { lo + step * i as f64 }).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectedMin {
    pub n: usize,
    /// First threshold, ascending from the far left, where the curve reaches 0.5.
    pub u_star: f64,
    /// `-√N`
    pub asymptotic: f64,
}

/// Scans up from `-(√N + 15)` in steps of [`SCAN_STEP`] for the first threshold
/// with `E[χ] > 0.5`, then bisects the bracket to [`BISECTION_TOLERANCE`].
pub fn expected_min(n: usize) -> Result<ExpectedMin> {
    check_dimension(n)?;
    let (lo, hi) = limit_window(n);
    let steps = libm::ceil((hi - lo) / SCAN_STEP) as usize;
    let mut left = lo;
    let mut right = None;
    for i in 1..=steps {
        let u = (lo + SCAN_STEP * i as f64).min(hi);
        if expected_euler(n, u)? > 0.5 {
            right = Some(u);
            break;
        }
        left = u;
    }
    let mut right = right.ok_or(Error::NoCrossing { n, lo, hi })?;
    while right - left > BISECTION_TOLERANCE {
        let mid = 0.5 * (left + right);
        if expected_euler(n, mid)? > 0.5 {
            right = mid;
        } else {
            left = mid;
        }
    }
    Ok(ExpectedMin { n, u_star: 0.5 * (left + right), asymptotic: -sqrt(n as f64) })
}
