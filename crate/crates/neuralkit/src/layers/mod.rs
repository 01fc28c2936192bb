//! Layer primitives as pure forward/backward function pairs over single samples.

mod activation;
mod conv;
mod dropout;
mod linear;
mod pool;

pub use activation::{leaky_relu, leaky_relu_backward, tanh, tanh_backward};
pub use conv::{conv2d, conv2d_backward, ConvGrads};
pub use dropout::{dropout, dropout_backward};
pub use linear::{linear, linear_backward, LinearGrads};
pub use pool::{avgpool_rate_match, maxpool2d, maxpool2d_backward};
