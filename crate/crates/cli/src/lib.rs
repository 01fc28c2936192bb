//! Harness behind the `headalign` binary: dataset generation, classical
//! alignment, HeadingNet training, evaluation sweeps and report emission.

pub mod commands;
pub mod error;
pub mod eval;
pub mod report;

pub use commands::{run, Cli, Command, Format};
pub use error::{CliError, Result};
pub use eval::{evaluate, EvalReport, EvalRequest, Method};
