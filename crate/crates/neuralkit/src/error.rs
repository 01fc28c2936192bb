use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NnError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unknown HeadingNet variation {0} (expected 10, 30, 60, 90 or 120)")]
    UnknownVariation(u32),
    #[error("non-finite value at epoch {epoch}, batch {batch}, first in layer '{layer}' (loss {loss})")]
    NonFinite {
        epoch: usize,
        batch: usize,
        layer: String,
        loss: f64,
    },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("checkpoint {path}: {msg}")]
    Checkpoint { path: PathBuf, msg: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Core(#[from] headalign_core::Error),
}

impl NnError {
    /// Stable machine-readable tag.
    pub fn code(&self) -> &'static str {
        match self {
            NnError::Shape(_) => "shape",
            NnError::InvalidArgument(_) => "invalid-argument",
            NnError::UnknownVariation(_) => "unknown-variation",
            NnError::NonFinite { .. } => "non-finite",
            NnError::InsufficientData(_) => "insufficient-data",
            NnError::Checkpoint { .. } => "checkpoint",
            NnError::Io { .. } => "io",
            NnError::Core(e) => e.code(),
        }
    }

    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        NnError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

pub type Result<T, E = NnError> = std::result::Result<T, E>;
