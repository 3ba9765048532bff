//! A binary classifier whose only model is one frozen random field.
//!
//! The field lives on `R^{N_P + N_I}` and is queried at `[β; x]`; the output
//! probability is `sigmoid(phi([β; x]))`. Training moves `β` alone by
//! minibatch gradient descent on cross-entropy.
//!
//! Training does not call [`SpectralField::eval`] per instance. For a batch,
//! `z_m^β · β` is computed once per spectral row and shared by all instances,
//! and the batch gradient is assembled as `Σ_m c_m z_m^β`. Work is split into
//! fixed row chunks whose partial results are combined in chunk order, so the
//! outcome does not depend on the thread count.

use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};

use crate::datasets::Dataset;
use crate::error::{check_non_negative, Error, Result};
use crate::exec;
use crate::fieldsim::SpectralField;
use crate::math::{dot, exp, ln, ln_1p, sin_cos};
use crate::rng::{derive_seed, derived_rng, tag};

pub const DEFAULT_BATCH_SIZE: usize = 128;
pub const DEFAULT_EPOCHS: usize = 10;
pub const LOSS_CLAMP: f64 = 1e-12;
/// Accuracy below which a learning rate counts as past the critical value.
pub const CHANCE_LEVEL: f64 = 0.55;
const ROW_CHUNK: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum BetaInit {
    #[default]
    Zero,
    /// `β_i ~ N(0, scale²)` from the config seed.
    Gaussian { scale: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierConfig {
    pub n_p: usize,
    pub n_i: usize,
    pub m: usize,
    pub eta: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub beta_init: BetaInit,
}

impl ClassifierConfig {
    pub fn new(n_p: usize, n_i: usize, m: usize, eta: f64, seed: u64) -> Self {
        Self { n_p, n_i, m, eta, batch_size: DEFAULT_BATCH_SIZE, epochs: DEFAULT_EPOCHS, seed, beta_init: BetaInit::Zero }
    }

    /// `N = N_P + N_I`
    pub fn dimension(&self) -> usize {
        self.n_p + self.n_i
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_p == 0 || self.n_i == 0 {
            return Err(Error::ZeroDimension);
        }
        if self.m <= self.dimension() {
            return Err(Error::TooFewSpectralSamples { n: self.dimension(), m: self.m });
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidArgument("batch size must be positive"));
        }
        check_non_negative("eta", self.eta)
    }

    pub fn field_seed(&self) -> u64 {
        derive_seed(self.seed, tag::CLASSIFIER_FIELD, 0)
    }

    pub fn build_field(&self) -> Result<SpectralField> {
        self.validate()?;
        SpectralField::build(self.dimension(), self.m, self.field_seed())
    }

    fn initial_beta(&self) -> Vec<f64> {
        match self.beta_init {
            BetaInit::Zero => alloc::vec![0.0; self.n_p],
            BetaInit::Gaussian { scale } => {
                let mut rng = derived_rng(self.seed, tag::BETA_INIT, 0);
                (0..self.n_p).map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    scale * z
                }).collect::<Vec<f64>>()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchLoss {
    pub epoch: usize,
    pub batch: usize,
    pub mean_loss: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochAccuracy {
    pub epoch: usize,
    pub test_accuracy: f64,
}

/// Epochs and batches are numbered from 1.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct History {
    pub batch_losses: Vec<BatchLoss>,
    pub test_accuracy: Vec<EpochAccuracy>,
}

impl History {
    pub fn mean_loss_of_epoch(&self, epoch: usize) -> Option<f64> {
        let losses: Vec<f64> = self.batch_losses.iter().filter(|b| b.epoch == epoch).map(|b| b.mean_loss).collect();
        (!losses.is_empty()).then(|| losses.iter().sum::<f64>() / losses.len() as f64)
    }

    pub fn final_accuracy(&self) -> Option<f64> {
        self.test_accuracy.last().map(|a| a.test_accuracy)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierState {
    pub beta: Vec<f64>,
    pub field: Arc<SpectralField>,
    pub history: History,
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + exp(-x))
    } else {
        let e = exp(x);
        e / (1.0 + e)
    }
}

/// Cross-entropy `-[t ln y + (1 - t) ln(1 - y)]` with `y` clamped to
/// `[1e-12, 1 - 1e-12]`.
pub fn loss(y: f64, y_true: u8) -> f64 {
    let y = y.clamp(LOSS_CLAMP, 1.0 - LOSS_CLAMP);
    if y_true == 1 {
        -ln(y)
    } else {
        -ln_1p(-y)
    }
}

impl ClassifierState {
    pub fn new(config: &ClassifierConfig, field: Arc<SpectralField>) -> Result<Self> {
        config.validate()?;
        if field.dimension() != config.dimension() {
            return Err(Error::DimensionMismatch { expected: config.dimension(), found: field.dimension() });
        }
        Ok(Self { beta: config.initial_beta(), field, history: History::default() })
    }

    pub fn input_dimension(&self) -> usize {
        self.field.dimension() - self.beta.len()
    }

    fn concat(&self, x_input: &[f64]) -> Result<Vec<f64>> {
        if x_input.len() != self.input_dimension() {
            return Err(Error::DimensionMismatch { expected: self.input_dimension(), found: x_input.len() });
        }
        let mut x = Vec::with_capacity(self.field.dimension());
        x.extend_from_slice(&self.beta);
        x.extend_from_slice(x_input);
        Ok(x)
    }

    /// `sigmoid(phi([β; x]))`.
    pub fn predict(&self, x_input: &[f64]) -> Result<f64> {
        Ok(sigmoid(self.field.eval(&self.concat(x_input)?)?))
    }

    /// `∂ loss / ∂β = (y - y_true) ∇_β phi([β; x])`.
    pub fn loss_gradient(&self, x_input: &[f64], y_true: u8) -> Result<Vec<f64>> {
        let (value, grad) = self.field.eval_with_grad(&self.concat(x_input)?)?;
        let residual = sigmoid(value) - y_true as f64;
        Ok(grad[..self.beta.len()].iter().map(|g| residual * g).collect())
    }
}

/// Per-chunk output of the batched forward pass.
struct ChunkForward {
    phi: Vec<f64>,
    /// `∂phi/∂θ = -(a sin θ + b cos θ)`, instance-major within the chunk.
    dphi: Vec<f64>,
}

fn chunk_count(m: usize) -> usize {
    m.div_ceil(ROW_CHUNK)
}

/// Field values at `[β; x_k]` for the gathered batch inputs (row-major, width
/// `N_I`); optionally keeps the phase derivatives for the gradient.
fn forward(field: &SpectralField, beta: &[f64], inputs: &[f64], keep_derivatives: bool) -> (Vec<f64>, Vec<ChunkForward>) {
    let n = field.dimension();
    let n_p = beta.len();
    let n_i = n - n_p;
    let count = inputs.len() / n_i;
    let (re, im) = (field.weights_re(), field.weights_im());
    let chunks = exec::map_indexed(chunk_count(field.spectral_samples()), |k| {
        let rows = k * ROW_CHUNK..((k + 1) * ROW_CHUNK).min(field.spectral_samples());
        let width = rows.len();
        let mut phi = alloc::vec![0.0; count];
        let mut dphi = if keep_derivatives { alloc::vec![0.0; count * width] } else { Vec::new() };
        for (r, m) in rows.enumerate() {
            let z = field.frequency_row(m);
            let base = dot(&z[..n_p], beta);
            let z_input = &z[n_p..];
            for (i, x) in inputs.chunks_exact(n_i).enumerate() {
                let (s, c) = sin_cos(base + dot(z_input, x));
                phi[i] += re[m] * c - im[m] * s;
                if keep_derivatives {
                    dphi[i * width + r] = -(re[m] * s + im[m] * c);
                }
            }
        }
        ChunkForward { phi, dphi }
    });
    let mut phi = alloc::vec![0.0; count];
    for chunk in &chunks {
        for (p, q) in phi.iter_mut().zip(&chunk.phi) {
            *p += q;
        }
    }
    (phi, chunks)
}

/// Mean over the batch of `(y_k - t_k) ∇_β phi`, from the kept derivatives.
fn batch_gradient(field: &SpectralField, n_p: usize, chunks: &[ChunkForward], residuals: &[f64]) -> Vec<f64> {
    let count = residuals.len() as f64;
    let partials = exec::map_indexed(chunks.len(), |k| {
        let start = k * ROW_CHUNK;
        let width = chunks[k].dphi.len() / residuals.len();
        let mut g = alloc::vec![0.0; n_p];
        for r in 0..width {
            let c: f64 = residuals.iter().enumerate().map(|(i, res)| res * chunks[k].dphi[i * width + r]).sum::<f64>() / count;
            let z = &field.frequency_row(start + r)[..n_p];
            for (gj, zj) in g.iter_mut().zip(z) {
                *gj += c * zj;
            }
        }
        g
    });
    let mut g = alloc::vec![0.0; n_p];
    for p in &partials {
        for (a, b) in g.iter_mut().zip(p) {
            *a += b;
        }
    }
    g
}

fn gather(data: &Dataset, indices: &[usize]) -> Vec<f64> {
    let mut out = Vec::with_capacity(indices.len() * data.dimension());
    for &i in indices {
        out.extend_from_slice(data.input(i));
    }
    out
}

fn check_data(state: &ClassifierState, data: &Dataset) -> Result<()> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if data.dimension() != state.input_dimension() {
        return Err(Error::DimensionMismatch { expected: state.input_dimension(), found: data.dimension() });
    }
    Ok(())
}

/// Fraction of instances where `(y >= 0.5)` matches the label.
pub fn evaluate(state: &ClassifierState, test: &Dataset) -> Result<f64> {
    check_data(state, test)?;
    let block = 4 * DEFAULT_BATCH_SIZE;
    let mut correct = 0usize;
    for start in (0..test.len()).step_by(block) {
        let indices: Vec<usize> = (start..(start + block).min(test.len())).collect();
        let (phi, _) = forward(&state.field, &state.beta, &gather(test, &indices), false);
        correct += indices.iter().zip(&phi).filter(|(&i, &p)| ((sigmoid(p) >= 0.5) as u8) == test.label(i)).count();
    }
    Ok(correct as f64 / test.len() as f64)
}

/// Mean batch gradient of the loss at the current `β` (exposed for checking
/// against per-instance gradients).
pub fn mean_loss_gradient(state: &ClassifierState, data: &Dataset, indices: &[usize]) -> Result<Vec<f64>> {
    check_data(state, data)?;
    if indices.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let (phi, chunks) = forward(&state.field, &state.beta, &gather(data, indices), true);
    let residuals: Vec<f64> = indices.iter().zip(&phi).map(|(&i, &p)| sigmoid(p) - data.label(i) as f64).collect();
    Ok(batch_gradient(&state.field, state.beta.len(), &chunks, &residuals))
}

/// Trains on a fresh field drawn from the config seed.
pub fn train(config: &ClassifierConfig, train_set: &Dataset, test_set: &Dataset) -> Result<ClassifierState> {
    train_with_field(config, Arc::new(config.build_field()?), train_set, test_set)
}

/// Trains against a given field, so several runs can share one realization.
pub fn train_with_field(
    config: &ClassifierConfig,
    field: Arc<SpectralField>,
    train_set: &Dataset,
    test_set: &Dataset,
) -> Result<ClassifierState> {
    let mut state = ClassifierState::new(config, field)?;
    check_data(&state, train_set)?;
    check_data(&state, test_set)?;
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    for epoch in 1..=config.epochs {
        order.shuffle(&mut derived_rng(config.seed, tag::SHUFFLE, epoch as u64));
        for (b, indices) in order.chunks(config.batch_size).enumerate() {
            let (phi, chunks) = forward(&state.field, &state.beta, &gather(train_set, indices), true);
            let mut total = 0.0;
            let residuals: Vec<f64> = indices
                .iter()
                .zip(&phi)
                .map(|(&i, &p)| {
                    let y = sigmoid(p);
                    total += loss(y, train_set.label(i));
                    y - train_set.label(i) as f64
                })
                .collect();
            state.history.batch_losses.push(BatchLoss { epoch, batch: b + 1, mean_loss: total / indices.len() as f64 });
            if config.eta != 0.0 {
                let g = batch_gradient(&state.field, state.beta.len(), &chunks, &residuals);
                for (beta, gj) in state.beta.iter_mut().zip(&g) {
                    *beta -= config.eta * gj;
                }
            }
        }
        let test_accuracy = evaluate(&state, test_set)?;
        log::info!("epoch {epoch}: test accuracy {test_accuracy:.4}");
        state.history.test_accuracy.push(EpochAccuracy { epoch, test_accuracy });
    }
    Ok(state)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub eta: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LrSweep {
    pub rows: Vec<SweepRow>,
    /// Per `N`, the first grid `η` (ascending) with accuracy below [`CHANCE_LEVEL`].
    pub critical: Vec<(usize, Option<f64>)>,
}

/// Final test accuracy over an `η × N` grid. For each total dimension `N` the
/// template's `N_I` is kept and `N_P = N - N_I`; all rates at one `N` share a
/// field.
pub fn lr_sweep(
    template: &ClassifierConfig,
    etas: &[f64],
    ns: &[usize],
    train_set: &Dataset,
    test_set: &Dataset,
) -> Result<LrSweep> {
    if etas.is_empty() || ns.is_empty() {
        return Err(Error::InvalidArgument("sweep grid is empty"));
    }
    let mut etas = etas.to_vec();
    etas.sort_by(|a, b| a.total_cmp(b));
    let mut rows = Vec::new();
    let mut critical = Vec::new();
    for &n in ns {
        if n <= template.n_i {
            return Err(Error::InvalidArgument("sweep dimension must exceed the input dimension"));
        }
        let base = ClassifierConfig { n_p: n - template.n_i, ..template.clone() };
        let field = Arc::new(base.build_field()?);
        let mut first_below = None;
        for &eta in &etas {
            let config = ClassifierConfig { eta, ..base.clone() };
            let state = train_with_field(&config, field.clone(), train_set, test_set)?;
            let accuracy = state.history.final_accuracy().unwrap_or_else(|| evaluate(&state, test_set).unwrap_or(0.0));
            if first_below.is_none() && accuracy < CHANCE_LEVEL {
                first_below = Some(eta);
            }
            rows.push(SweepRow { n, eta, accuracy });
        }
        critical.push((n, first_below));
    }
    Ok(LrSweep { rows, critical })
}
