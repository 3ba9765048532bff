//! Randomized spectral realizations of the unit squared-exponential field.
//!
//! A realization is the real part of a sum of `M` complex exponentials,
//!
//! ```text
//! phi(x)  =  Σ_m  Re[ w_m exp(i z_m·x) ]  =  Σ_m  a_m cos(z_m·x) - b_m sin(z_m·x)
//! ∇phi(x) = -Σ_m  z_m (a_m sin(z_m·x) + b_m cos(z_m·x))
//! ```
//!
//! with frequency rows `z_m ~ N(0, I_N)` and `a_m, b_m ~ N(0, 1/M)`
//! independently, which gives `Var[phi(x)] = 1` and
//! `Cov[phi(x), phi(x')] = exp(-|x - x'|²/2)` exactly in expectation over
//! realizations. The gradient is the exact derivative of the realization.

use alloc::vec::Vec;

use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_dimension, Error, Result};
use crate::exec;
use crate::math::{axpy, dot, sin_cos, sqrt};
use crate::rng::{derived_rng, tag};

/// Spectral samples used when none are requested explicitly.
pub const DEFAULT_SPECTRAL_SAMPLES: usize = 20_000;

pub const SNAPSHOT_MAGIC: [u8; 4] = *b"GRFS";
pub const SNAPSHOT_VERSION: u16 = 1;
const SNAPSHOT_HEADER_LEN: usize = 4 + 2 + 4 + 4 + 8;

/// `M = 20 000` up to `N = 500`, otherwise `max(20 000, 10 N)`.
pub fn default_spectral_samples(n: usize) -> usize {
    if n <= 500 {
        DEFAULT_SPECTRAL_SAMPLES
    } else {
        let m = DEFAULT_SPECTRAL_SAMPLES.max(10 * n);
        log::warn!("N = {n} exceeds the calibrated range; using M = {m} spectral samples");
        m
    }
}

/// One frozen field realization.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    n: usize,
    m: usize,
    seed: u64,
    /// `m × n`, row-major.
    frequencies: Vec<f64>,
    weights_re: Vec<f64>,
    weights_im: Vec<f64>,
}

/// Field value and gradient at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldQuery {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
}

impl SpectralField {
    /// Draws a realization with `m` spectral samples in dimension `n`.
    ///
    /// Frequencies and weights come from separate streams of `seed`, and both
    /// are drawn sequentially, so growing `m` extends rather than reshuffles
    /// the frequency matrix.
    pub fn build(n: usize, m: usize, seed: u64) -> Result<Self> {
        check_dimension(n)?;
        if m <= n {
            return Err(Error::TooFewSpectralSamples { n, m });
        }
        if m < 10 * n {
            log::warn!("M = {m} < 10 N = {}; gradients may be confined to a low-dimensional subspace", 10 * n);
        }
        let mut z_rng = derived_rng(seed, tag::FIELD_FREQUENCIES, 0);
        let frequencies: Vec<f64> = (0..m * n).map(|_| StandardNormal.sample(&mut z_rng)).collect();
        let mut w_rng = derived_rng(seed, tag::FIELD_WEIGHTS, 0);
        let scale = 1.0 / sqrt(m as f64);
        let mut weights_re = Vec::with_capacity(m);
        let mut weights_im = Vec::with_capacity(m);
        for _ in 0..m {
            let re: f64 = StandardNormal.sample(&mut w_rng);
            let im: f64 = StandardNormal.sample(&mut w_rng);
            weights_re.push(scale * re);
            weights_im.push(scale * im);
        }
        Ok(Self { n, m, seed, frequencies, weights_re, weights_im })
    }

    /// Assembles a field from explicit frequencies (row-major `m × n`) and
    /// complex weights. No `M > N` requirement is applied, so degenerate
    /// test fields (a single frequency, all-zero frequencies) are allowed.
    pub fn from_parts(n: usize, frequencies: Vec<f64>, weights: &[(f64, f64)], seed: u64) -> Result<Self> {
        check_dimension(n)?;
        let m = weights.len();
        if m == 0 {
            return Err(Error::InvalidArgument("a field needs at least one spectral sample"));
        }
        if frequencies.len() != m * n {
            return Err(Error::DimensionMismatch { expected: m * n, found: frequencies.len() });
        }
        let (weights_re, weights_im) = weights.iter().copied().unzip();
        Ok(Self { n, m, seed, frequencies, weights_re, weights_im })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn spectral_samples(&self) -> usize {
        self.m
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    #[inline]
    pub fn frequency_row(&self, m: usize) -> &[f64] {
        &self.frequencies[m * self.n..(m + 1) * self.n]
    }

    pub fn weights_re(&self) -> &[f64] {
        &self.weights_re
    }

    pub fn weights_im(&self) -> &[f64] {
        &self.weights_im
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: x.len() });
        }
        Ok(())
    }

    /// Shared kernel of every query path; identical arithmetic order keeps the
    /// single and batched paths bit-identical.
    fn accumulate(&self, x: &[f64], mut gradient: Option<&mut [f64]>) -> f64 {
        let mut value = 0.0;
        for m in 0..self.m {
            let row = self.frequency_row(m);
            let (s, c) = sin_cos(dot(row, x));
            let (a, b) = (self.weights_re[m], self.weights_im[m]);
            value += a * c - b * s;
            if let Some(g) = gradient.as_deref_mut() {
                axpy(-(a * s + b * c), row, g);
            }
        }
        value
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        Ok(self.accumulate(x, None))
    }

    pub fn grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        let mut g = alloc::vec![0.0; self.n];
        self.accumulate(x, Some(&mut g));
        Ok(g)
    }

    pub fn eval_with_grad(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.check_point(x)?;
        let mut g = alloc::vec![0.0; self.n];
        let value = self.accumulate(x, Some(&mut g));
        Ok((value, g))
    }

    pub fn query(&self, x: &[f64]) -> Result<FieldQuery> {
        let (value, gradient) = self.eval_with_grad(x)?;
        Ok(FieldQuery { x: x.to_vec(), value, gradient })
    }

    /// Values and gradients at many points, in input order.
    pub fn eval_batch<P: AsRef<[f64]> + Sync>(&self, xs: &[P]) -> Result<Vec<FieldQuery>> {
        for x in xs {
            self.check_point(x.as_ref())?;
        }
        exec::map_indexed(xs.len(), |i| self.query(xs[i].as_ref())).into_iter().collect()
    }

    /// Serializes to the `GRFS` snapshot layout: little-endian header
    /// (magic, version u16, N u32, M u32, seed u64), the frequency matrix
    /// row-major, then the weights as interleaved (re, im) pairs.
    pub fn to_snapshot_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(SNAPSHOT_HEADER_LEN + 8 * (self.m * self.n + 2 * self.m));
        out.extend_from_slice(&SNAPSHOT_MAGIC);
        out.extend_from_slice(&SNAPSHOT_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.n as u32).to_le_bytes());
        out.extend_from_slice(&(self.m as u32).to_le_bytes());
        out.extend_from_slice(&self.seed.to_le_bytes());
        for z in &self.frequencies {
            out.extend_from_slice(&z.to_le_bytes());
        }
        for (re, im) in self.weights_re.iter().zip(&self.weights_im) {
            out.extend_from_slice(&re.to_le_bytes());
            out.extend_from_slice(&im.to_le_bytes());
        }
        out
    }

    pub fn from_snapshot_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < SNAPSHOT_HEADER_LEN {
            return Err(Error::Snapshot("shorter than header"));
        }
        if bytes[..4] != SNAPSHOT_MAGIC {
            return Err(Error::Snapshot("bad magic"));
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != SNAPSHOT_VERSION {
            return Err(Error::Snapshot("unsupported version"));
        }
        let n = u32::from_le_bytes(bytes[6..10].try_into().unwrap()) as usize;
        let m = u32::from_le_bytes(bytes[10..14].try_into().unwrap()) as usize;
        let seed = u64::from_le_bytes(bytes[14..22].try_into().unwrap());
        let expected = m
            .checked_mul(n)
            .and_then(|mn| mn.checked_add(2 * m))
            .and_then(|count| count.checked_mul(8))
            .and_then(|payload| payload.checked_add(SNAPSHOT_HEADER_LEN))
            .ok_or(Error::Snapshot("size overflow"))?;
        if bytes.len() != expected {
            return Err(Error::Snapshot("payload length does not match header"));
        }
        let mut floats = bytes[SNAPSHOT_HEADER_LEN..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
        let frequencies: Vec<f64> = floats.by_ref().take(m * n).collect();
        let mut weights = Vec::with_capacity(m);
        while let (Some(re), Some(im)) = (floats.next(), floats.next()) {
            weights.push((re, im));
        }
        Self::from_parts(n, frequencies, &weights, seed)
    }

    /// FNV-1a digest of the snapshot bytes; changes iff the realization does.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for byte in self.to_snapshot_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        h
    }
}
