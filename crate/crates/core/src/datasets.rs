//! Binary classification data: the sine-separated plane, MNIST parity from
//! IDX bytes, and mean-0 / mean-norm-1 normalization.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, IdxError, Result};
use crate::math::{sin_cos, sqrt};
use crate::rng::{derived_rng, tag};

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;
pub const MNIST_SIDE: usize = 28;

/// Fitted on a training split and applied as `x ← (x - mean) / mean_norm`.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalization {
    pub mean: Vec<f64>,
    pub mean_norm: f64,
}

/// Row-major inputs of width `dimension` with 0/1 labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dimension: usize,
    inputs: Vec<f64>,
    labels: Vec<u8>,
    normalization: Option<Normalization>,
}

impl Dataset {
    pub fn new(dimension: usize, inputs: Vec<f64>, labels: Vec<u8>) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::ZeroDimension);
        }
        if inputs.len() != dimension * labels.len() {
            return Err(Error::DimensionMismatch { expected: dimension * labels.len(), found: inputs.len() });
        }
        if labels.iter().any(|&l| l > 1) {
            return Err(Error::InvalidArgument("labels must be 0 or 1"));
        }
        Ok(Self { dimension, inputs, labels, normalization: None })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn input(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn label(&self, i: usize) -> u8 {
        self.labels[i]
    }

    pub fn inputs(&self) -> &[f64] {
        &self.inputs
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn normalization(&self) -> Option<&Normalization> {
        self.normalization.as_ref()
    }

    /// Fraction of label-1 instances.
    pub fn positive_fraction(&self) -> f64 {
        self.labels.iter().map(|&l| l as f64).sum::<f64>() / self.len() as f64
    }

    pub fn with_inverted_labels(&self) -> Self {
        Self { labels: self.labels.iter().map(|l| 1 - l).collect(), ..self.clone() }
    }

    /// Labels permuted by a seeded shuffle, breaking any input/label link.
    pub fn with_shuffled_labels(&self, seed: u64) -> Self {
        let mut labels = self.labels.clone();
        labels.shuffle(&mut derived_rng(seed, tag::SHUFFLE, u64::MAX));
        Self { labels, ..self.clone() }
    }

    /// First `count` instances (or all, if fewer).
    pub fn head(&self, count: usize) -> Self {
        let count = count.min(self.len());
        Self {
            inputs: self.inputs[..count * self.dimension].to_vec(),
            labels: self.labels[..count].to_vec(),
            ..self.clone()
        }
    }
}

/// Label 1 iff `x2 > amplitude · sin(frequency · x1 + phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SineBoundary {
    pub amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
}

impl Default for SineBoundary {
    fn default() -> Self {
        Self { amplitude: 1.0, frequency: core::f64::consts::PI, phase: 0.0 }
    }
}

impl SineBoundary {
    pub fn label(&self, x1: f64, x2: f64) -> u8 {
        (x2 > self.amplitude * sin_cos(self.frequency * x1 + self.phase).0) as u8
    }
}

pub const SINE_TRAIN_SIZE: usize = 6000;
pub const SINE_TEST_SIZE: usize = 1000;

fn sine_split(boundary: &SineBoundary, count: usize, seed: u64, split: u64) -> Result<Dataset> {
    let mut rng = derived_rng(seed, split, 0);
    let mut inputs = Vec::with_capacity(2 * count);
    let mut labels = Vec::with_capacity(count);
    for _ in 0..count {
        let x1: f64 = StandardNormal.sample(&mut rng);
        let x2: f64 = StandardNormal.sample(&mut rng);
        inputs.extend([x1, x2]);
        labels.push(boundary.label(x1, x2));
    }
    Dataset::new(2, inputs, labels)
}

/// Standard-normal points in the plane labelled by `boundary`; train and test
/// come from separate random streams.
pub fn gen_sine_with(boundary: &SineBoundary, n_train: usize, n_test: usize, seed: u64) -> Result<(Dataset, Dataset)> {
    if n_train == 0 || n_test == 0 {
        return Err(Error::EmptyDataset);
    }
    Ok((sine_split(boundary, n_train, seed, tag::TRAIN_SPLIT)?, sine_split(boundary, n_test, seed, tag::TEST_SPLIT)?))
}

pub fn gen_sine(n_train: usize, n_test: usize, seed: u64) -> Result<(Dataset, Dataset)> {
    gen_sine_with(&SineBoundary::default(), n_train, n_test, seed)
}

/// Parsed IDX image file (`u8` payload, three dimensions).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

fn read_u32(bytes: &[u8], offset: usize) -> Result<u32, IdxError> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or(IdxError::Truncated { needed: offset + 4, available: bytes.len() })
}

fn check_magic(bytes: &[u8], expected: u32) -> Result<(), IdxError> {
    let found = read_u32(bytes, 0)?;
    if found != expected {
        return Err(IdxError::BadMagic { expected, found });
    }
    Ok(())
}

fn payload(bytes: &[u8], offset: usize, len: usize) -> Result<&[u8], IdxError> {
    bytes.get(offset..offset + len).ok_or(IdxError::Truncated { needed: offset + len, available: bytes.len() })
}

pub fn parse_idx_images(bytes: &[u8]) -> Result<IdxImages, IdxError> {
    check_magic(bytes, IDX_IMAGES_MAGIC)?;
    let count = read_u32(bytes, 4)? as usize;
    let rows = read_u32(bytes, 8)? as usize;
    let cols = read_u32(bytes, 12)? as usize;
    let pixels = payload(bytes, 16, count * rows * cols)?.to_vec();
    Ok(IdxImages { count, rows, cols, pixels })
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>, IdxError> {
    check_magic(bytes, IDX_LABELS_MAGIC)?;
    let count = read_u32(bytes, 4)? as usize;
    Ok(payload(bytes, 8, count)?.to_vec())
}

pub fn encode_idx_images(images: &IdxImages) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + images.pixels.len());
    for v in [IDX_IMAGES_MAGIC, images.count as u32, images.rows as u32, images.cols as u32] {
        out.extend(v.to_be_bytes());
    }
    out.extend(&images.pixels);
    out
}

pub fn encode_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend(IDX_LABELS_MAGIC.to_be_bytes());
    out.extend((labels.len() as u32).to_be_bytes());
    out.extend(labels);
    out
}

/// Pixels scaled by 1/255, label = digit parity (odd → 1).
pub fn mnist_parity(images: &[u8], labels: &[u8]) -> Result<Dataset> {
    let images = parse_idx_images(images)?;
    let digits = parse_idx_labels(labels)?;
    if images.count != digits.len() {
        return Err(IdxError::CountMismatch { images: images.count, labels: digits.len() }.into());
    }
    let inputs = images.pixels.iter().map(|&p| p as f64 / 255.0).collect();
    Dataset::new(images.rows * images.cols, inputs, digits.iter().map(|d| d % 2).collect())
}

/// Fits mean and mean norm on `train` only.
pub fn fit_normalization(train: &Dataset) -> Result<Normalization> {
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let d = train.dimension;
    let count = train.len() as f64;
    let mut mean = alloc::vec![0.0; d];
    for i in 0..train.len() {
        for (m, x) in mean.iter_mut().zip(train.input(i)) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= count);
    let total_norm: f64 = (0..train.len())
        .map(|i| sqrt(train.input(i).iter().zip(&mean).map(|(x, m)| (x - m) * (x - m)).sum()))
        .sum();
    let mean_norm = total_norm / count;
    if !(mean_norm.is_normal()) {
        return Err(Error::DegenerateNormalization);
    }
    Ok(Normalization { mean, mean_norm })
}

impl Normalization {
    pub fn apply(&self, data: &Dataset) -> Result<Dataset> {
        if data.dimension != self.mean.len() {
            return Err(Error::DimensionMismatch { expected: self.mean.len(), found: data.dimension });
        }
        let inputs = data
            .inputs
            .chunks_exact(data.dimension)
            .flat_map(|row| row.iter().zip(&self.mean).map(|(x, m)| (x - m) / self.mean_norm))
            .collect();
        Ok(Dataset { inputs, normalization: Some(self.clone()), ..data.clone() })
    }
}

/// Normalizes both splits with statistics from `train`.
pub fn normalize(train: &Dataset, test: &Dataset) -> Result<(Dataset, Dataset)> {
    let fit = fit_normalization(train)?;
    Ok((fit.apply(train)?, fit.apply(test)?))
}
