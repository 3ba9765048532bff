//! Arbitrary-precision binary floating point, only as much as the alternating
//! Hermite sums in [`crate::excursion`] need.

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{ToPrimitive, Zero};

/// `mant · 2^exp`, with `|mant| < 2^prec` after every operation.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct BigFloat {
    mant: BigInt,
    exp: i64,
}

fn truncate(mant: BigInt, exp: i64, prec: u64) -> BigFloat {
    let bits = mant.bits();
    if bits <= prec {
        return BigFloat { mant, exp };
    }
    let shift = bits - prec;
    let (sign, mag) = mant.into_parts();
    BigFloat { mant: BigInt::from_biguint(sign, mag >> shift), exp: exp + shift as i64 }
}

impl BigFloat {
    pub fn zero() -> Self {
        Self { mant: BigInt::zero(), exp: 0 }
    }

    pub fn from_int(mant: BigInt, exp: i64, prec: u64) -> Self {
        truncate(mant, exp, prec)
    }

    pub fn from_u64(v: u64) -> Self {
        Self { mant: BigInt::from(v), exp: 0 }
    }

    /// Exact conversion of a finite double.
    #[cfg(test)]
    pub fn from_f64(x: f64) -> Self {
        debug_assert!(x.is_finite());
        let (mant, exp) = decompose(x);
        Self { mant, exp }
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn neg(&self) -> Self {
        Self { mant: -&self.mant, exp: self.exp }
    }

    pub fn mul(&self, other: &Self, prec: u64) -> Self {
        truncate(&self.mant * &other.mant, self.exp + other.exp, prec)
    }

    pub fn mul_u64(&self, k: u64, prec: u64) -> Self {
        truncate(&self.mant * k, self.exp, prec)
    }

    pub fn div_u64(&self, d: u64, prec: u64) -> Self {
        let guard = prec + 64;
        truncate((&self.mant << guard) / d, self.exp - guard as i64, prec)
    }

    pub fn div(&self, other: &Self, prec: u64) -> Self {
        let guard = prec + other.mant.bits() + 2;
        truncate((&self.mant << guard) / &other.mant, self.exp - other.exp - guard as i64, prec)
    }

    pub fn add(&self, other: &Self, prec: u64) -> Self {
        if other.is_zero() {
            return truncate(self.mant.clone(), self.exp, prec);
        }
        if self.is_zero() {
            return truncate(other.mant.clone(), other.exp, prec);
        }
        let top_a = self.mant.bits() as i64 + self.exp;
        let top_b = other.mant.bits() as i64 + other.exp;
        if top_a - top_b > prec as i64 + 2 {
            return truncate(self.mant.clone(), self.exp, prec);
        }
        if top_b - top_a > prec as i64 + 2 {
            return truncate(other.mant.clone(), other.exp, prec);
        }
        let exp = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - exp) as u64;
        let b = &other.mant << (other.exp - exp) as u64;
        truncate(a + b, exp, prec)
    }

    pub fn sqrt(&self, prec: u64) -> Self {
        debug_assert!(self.mant.sign() != Sign::Minus);
        let mut shift = (2 * prec + 2).saturating_sub(self.mant.bits()) as i64;
        if (self.exp - shift) % 2 != 0 {
            shift += 1;
        }
        let m = self.mant.magnitude() << shift as u64;
        truncate(BigInt::from(m.sqrt()), (self.exp - shift) / 2, prec)
    }

    /// `floor(log2 |x|)`, `None` for zero.
    pub fn log2_floor(&self) -> Option<i64> {
        (!self.is_zero()).then(|| self.mant.bits() as i64 - 1 + self.exp)
    }

    /// `(f, e)` with `x = f · 2^e` and `0.5 ≤ |f| < 1`; `(0, 0)` for zero.
    pub fn to_f64_parts(&self) -> (f64, i64) {
        if self.is_zero() {
            return (0.0, 0);
        }
        let bits = self.mant.bits();
        let mag: &BigUint = self.mant.magnitude();
        let top = if bits > 64 { mag >> (bits - 64) } else { mag << (64 - bits) };
        let top = top.to_u64().unwrap_or(u64::MAX);
        let f = top as f64 / 18_446_744_073_709_551_616.0;
        let f = if f >= 1.0 { 1.0 - f64::EPSILON / 2.0 } else { f };
        let f = if self.mant.sign() == Sign::Minus { -f } else { f };
        (f, self.exp + bits as i64)
    }

    #[cfg(test)]
    pub fn to_f64(&self) -> f64 {
        let (f, e) = self.to_f64_parts();
        libm::scalbn(f, e.clamp(-2200, 2200) as i32)
    }
}

/// Splits a finite double into `m · 2^e` with `m` odd (or zero).
pub(crate) fn decompose(x: f64) -> (BigInt, i64) {
    if x == 0.0 {
        return (BigInt::zero(), 0);
    }
    let bits = x.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mut m, mut e) = if biased == 0 { (frac, -1074) } else { (frac | (1u64 << 52), biased - 1075) };
    let tz = m.trailing_zeros();
    m >>= tz;
    e += tz as i64;
    let m = BigInt::from(m);
    (if x < 0.0 { -m } else { m }, e)
}

fn atan_inv_fixed(x: u64, q: u64) -> BigInt {
    let mut term = (BigInt::from(1u8) << q) / x;
    let mut sum = term.clone();
    let x2 = x * x;
    let mut k = 1u64;
    loop {
        term /= x2;
        if term.is_zero() {
            return sum;
        }
        let t = &term / (2 * k + 1);
        if k % 2 == 1 {
            sum -= t;
        } else {
            sum += t;
        }
        k += 1;
    }
}

/// π to `prec` bits via `π = 16 atan(1/5) − 4 atan(1/239)`.
pub(crate) fn pi(prec: u64) -> BigFloat {
    let q = prec + 32;
    let fixed = atan_inv_fixed(5, q) * 16u32 - atan_inv_fixed(239, q) * 4u32;
    BigFloat::from_int(fixed, -(q as i64), prec)
}
