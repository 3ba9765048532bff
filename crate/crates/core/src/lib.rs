//! Gradient descent on high-dimensional Gaussian random fields.
//!
//! The field model throughout is a zero-mean, unit-variance Gaussian random
//! field on `R^N` with squared-exponential correlation `k(r) = exp(-r²/2)`.
//!
//! - [`theory`]: closed forms for the field value after one gradient step
//!   (conditional moments, mean, variance, density, optimal learning rate,
//!   random-search comparison, large-`N` normal limit).
//! - [`fieldsim`]: randomized spectral realizations of the field with exact
//!   value and gradient queries.
//! - [`descent`]: Monte Carlo ensembles of single gradient steps compared
//!   against [`theory`].
//! - [`excursion`]: expected Euler characteristic of sublevel sets on the unit
//!   ball and the resulting estimate of the expected minimum.
//! - [`classifier`]: a binary classifier whose whole "network" is one frozen
//!   random field fed with `[parameters; input]`.
//! - [`datasets`]: the sine-separated toy problem, IDX parsing and
//!   normalization.
//!
//! The crate is `no_std` (with `alloc`) unless the `std` feature is enabled;
//! `parallel` adds rayon-backed ensemble evaluation. Results never depend on
//! the degree of parallelism.

#![cfg_attr(not(feature = "std"), no_std)]
#![warn(missing_debug_implementations)]

extern crate alloc;

mod bigfloat;
mod error;
mod exec;
pub mod math;
pub mod quadrature;
pub mod rng;
pub mod stats;

pub mod classifier;
pub mod datasets;
pub mod descent;
pub mod excursion;
pub mod fieldsim;
pub mod theory;

pub use error::{Error, IdxError, Result};
pub use fieldsim::{FieldQuery, SpectralField};
