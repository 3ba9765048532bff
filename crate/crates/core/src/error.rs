use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} must be non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },

    #[error("{name} must be finite, got {value}")]
    NotFinite { name: &'static str, value: f64 },

    #[error("dimension must be at least 1")]
    ZeroDimension,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("spectral sample count M = {m} must exceed the dimension N = {n}")]
    TooFewSpectralSamples { n: usize, m: usize },

    #[error("index {index} out of range 0..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),

    #[error("quadrature did not converge: estimate {estimate}, error estimate {error_estimate}")]
    QuadratureNotConverged { estimate: f64, error_estimate: f64 },

    #[error("loss of precision: cancellation needs {required_bits} bits, cap is {cap_bits}")]
    PrecisionLoss { required_bits: u64, cap_bits: u64 },

    #[error("no 0.5 crossing of the expected Euler characteristic in [{lo}, {hi}] for N = {n}")]
    NoCrossing { n: usize, lo: f64, hi: f64 },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("normalization is degenerate: mean norm is zero")]
    DegenerateNormalization,

    #[error("malformed field snapshot: {0}")]
    Snapshot(&'static str),

    #[error(transparent)]
    Idx(#[from] IdxError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdxError {
    #[error("bad magic number {found:#010x}, expected {expected:#010x}")]
    BadMagic { expected: u32, found: u32 },

    #[error("truncated IDX data: need {needed} bytes, have {available}")]
    Truncated { needed: usize, available: usize },

    #[error("record count mismatch: {images} images vs {labels} labels")]
    CountMismatch { images: usize, labels: usize },
}

pub(crate) fn check_non_negative(name: &'static str, value: f64) -> Result<()> {
    if value.is_nan() || value < 0.0 {
        Err(Error::Negative { name, value })
    } else {
        Ok(())
    }
}

pub(crate) fn check_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::NotFinite { name, value })
    }
}

pub(crate) fn check_dimension(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::ZeroDimension)
    } else {
        Ok(())
    }
}
