//! Reading MNIST-style IDX files from disk, plain or gzip-compressed.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use flate2::read::GzDecoder;
use grf_core::datasets::{self, Dataset};

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    fn prefix(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "t10k",
        }
    }

    /// Canonical file names, uncompressed.
    pub fn file_names(self) -> [String; 2] {
        let p = self.prefix();
        [format!("{p}-images-idx3-ubyte"), format!("{p}-labels-idx1-ubyte")]
    }
}

/// File contents, inflated when they start with the gzip magic bytes.
pub fn read_maybe_gz(path: &Path) -> Result<Vec<u8>, Failure> {
    let raw = fs::read(path).map_err(|e| Failure::io(path, e))?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::with_capacity(raw.len() * 4);
        GzDecoder::new(&raw[..]).read_to_end(&mut out).map_err(|e| Failure::io(path, e))?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

/// Pixels scaled to [0, 1], label = digit parity.
pub fn load_mnist_idx(images_path: &Path, labels_path: &Path) -> Result<Dataset, Failure> {
    let images = read_maybe_gz(images_path)?;
    let labels = read_maybe_gz(labels_path)?;
    datasets::mnist_parity(&images, &labels).map_err(|e| {
        Failure::Format(format!("{} / {}: {e}", images_path.display(), labels_path.display()))
    })
}

fn locate(dir: &Path, name: &str) -> Option<PathBuf> {
    [dir.join(name), dir.join(format!("{name}.gz"))].into_iter().find(|p| p.is_file())
}

/// Loads one split from a directory holding the canonical file names, with or
/// without a `.gz` suffix.
pub fn load_mnist_dir(dir: &Path, split: Split) -> Result<Dataset, Failure> {
    let [images, labels] = split.file_names();
    match (locate(dir, &images), locate(dir, &labels)) {
        (Some(i), Some(l)) => load_mnist_idx(&i, &l),
        _ => Err(Failure::MissingData(format!(
            "expected {images}[.gz] and {labels}[.gz] in {}",
            dir.display()
        ))),
    }
}
