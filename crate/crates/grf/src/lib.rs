//! Experiment runner for `grf-core`: file formats, artifact writing and the
//! `grf` command line.

pub mod cli;
pub mod config;
pub mod io;
pub mod mnist;

use std::path::Path;

/// Why a run stopped; each kind maps to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum Failure {
    /// Exit code 1: the run finished but a checked band or threshold failed.
    #[error("acceptance check failed:\n{0}")]
    Band(String),
    /// Exit code 2.
    #[error("usage: {0}")]
    Usage(String),
    /// Exit code 3.
    #[error("I/O error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    /// Exit code 3.
    #[error("format error: {0}")]
    Format(String),
    /// Exit code 3.
    #[error("missing input data: {0}")]
    MissingData(String),
    /// Numerical failure inside the core crate (exit code 1).
    #[error(transparent)]
    Compute(grf_core::Error),
}

impl Failure {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Failure::Io { path: path.display().to_string(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Band(_) | Failure::Compute(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Io { .. } | Failure::Format(_) | Failure::MissingData(_) => 3,
        }
    }
}

impl From<grf_core::Error> for Failure {
    fn from(e: grf_core::Error) -> Self {
        use grf_core::Error as E;
        match e {
            E::Idx(_) | E::Snapshot(_) => Failure::Format(e.to_string()),
            E::PrecisionLoss { .. } | E::QuadratureNotConverged { .. } | E::NoCrossing { .. } => Failure::Compute(e),
            _ => Failure::Usage(e.to_string()),
        }
    }
}
