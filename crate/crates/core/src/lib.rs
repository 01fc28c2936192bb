//! Coarse in-motion heading alignment for strapdown IMUs.
//!
//! - [`attitude`]: DCM / rotation vector / quaternion conversions and cyclic angles.
//! - [`strapdown`]: Earth reference models, frame-tracking integration and
//!   observation vectors.
//! - [`aligners`]: dual-vector and Wahba-type (quaternion eigenvector) aligners
//!   over integrated or instantaneous observations.
//! - [`sim`]: seeded moored-vessel motion and IMU/GNSS measurement simulator
//!   plus its CSV/JSON recording format.

pub mod aligners;
pub mod attitude;
pub mod error;
pub mod jacobi;
pub mod sim;
pub mod strapdown;

pub use error::{Error, Result};
