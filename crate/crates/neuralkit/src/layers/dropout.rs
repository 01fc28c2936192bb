use rand::Rng;

use crate::error::{NnError, Result};
use crate::tensor::Tensor;

/// Inverted dropout. In training mode each element is kept with probability
/// `1 − p` and rescaled by `1/(1 − p)`; in evaluation mode it is the identity.
///
/// Returns the output and the per-element multiplier for the backward pass.
pub fn dropout<R: Rng + ?Sized>(x: &Tensor, p: f64, training: bool, rng: &mut R) -> Result<(Tensor, Vec<f64>)> {
    if !(0.0..1.0).contains(&p) {
        return Err(NnError::InvalidArgument(format!("dropout probability {p} outside [0, 1)")));
    }
    if !training || p == 0.0 {
        return Ok((x.clone(), vec![1.0; x.len()]));
    }
    let scale = 1.0 / (1.0 - p);
    let mask: Vec<f64> = (0..x.len())
        .map(|_| if rng.gen::<f64>() >= p { scale } else { 0.0 })
        .collect();
    let mut y = x.clone();
    for (v, m) in y.data_mut().iter_mut().zip(&mask) {
        *v *= m;
    }
    Ok((y, mask))
}

pub fn dropout_backward(dy: &Tensor, mask: &[f64]) -> Tensor {
    let mut dx = dy.clone();
    for (d, m) in dx.data_mut().iter_mut().zip(mask) {
        *d *= m;
    }
    dx
}
