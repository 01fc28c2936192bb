//! A small, dependency-light CNN toolkit in `f64` — tensors, the handful of
//! layers HeadingNet needs with hand-written backward passes, AdamW, a step
//! scheduler and a cyclic angle loss — plus HeadingNet itself, its windowing
//! pipeline, training loop and checkpoint format.

pub mod checkpoint;
pub mod error;
pub mod layers;
pub mod loss;
pub mod model;
pub mod optim;
pub mod rng;
pub mod tensor;
pub mod train;
pub mod windows;

pub use error::{NnError, Result};
pub use model::{build_headingnet, HeadingNetConfig, Model, VARIATIONS};
pub use tensor::Tensor;
pub use train::{predict_heading, train, History, TrainConfig};
pub use windows::{make_windows, NormStats, Segment, Window, WindowMode, WindowSet};
