use std::path::PathBuf;

use thiserror::Error;

/// Failures raised by the attitude, strapdown, aligner and simulator layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate attitude: {0}")]
    DegenerateAttitude(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("alignment window: {0}")]
    AlignmentWindow(String),

    #[error("degenerate geometry: {pair} observation pair is collinear or singular ({detail})")]
    DegenerateGeometry { pair: &'static str, detail: String },

    #[error("ambiguous attitude: smallest eigenvalues {smallest:.3e} and {second:.3e} are not separated")]
    AmbiguousAttitude { smallest: f64, second: f64 },

    #[error("{}:{line}: {msg}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("metadata: {0}")]
    Meta(String),
}

impl Error {
    /// Stable machine-readable identifier, emitted on the diagnostic stream by the CLI.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::DegenerateAttitude(_) => "degenerate-attitude",
            Error::InsufficientData(_) => "insufficient-data",
            Error::AlignmentWindow(_) => "alignment-window",
            Error::DegenerateGeometry { .. } => "degenerate-geometry",
            Error::AmbiguousAttitude { .. } => "ambiguous-attitude",
            Error::Parse { .. } => "parse",
            Error::Io { .. } => "io",
            Error::Meta(_) => "metadata",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
