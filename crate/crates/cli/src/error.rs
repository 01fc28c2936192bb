use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("training needs an explicit --seed")]
    SeedRequired,
    #[error("no checkpoint for HeadingNet{t_align} at {}", path.display())]
    MissingCheckpoint { t_align: u32, path: PathBuf },
    #[error("{}: {msg}", path.display())]
    Artifact { path: PathBuf, msg: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] headalign_core::Error),
    #[error(transparent)]
    Nn(#[from] neuralkit::NnError),
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::SeedRequired => "seed-required",
            CliError::MissingCheckpoint { .. } => "missing-checkpoint",
            CliError::Artifact { .. } => "bad-artifact",
            CliError::Io { .. } => "io",
            CliError::Core(e) => e.code(),
            CliError::Nn(e) => e.code(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::SeedRequired => 2,
            _ => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
