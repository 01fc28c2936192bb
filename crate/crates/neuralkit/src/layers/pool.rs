use crate::error::{NnError, Result};
use crate::tensor::Tensor;

/// `(1×2)` max pooling over the width axis. An odd final column is dropped.
///
/// Returns the pooled map and, for every output cell, the flat input index it
/// was taken from (the first of the pair on ties).
pub fn maxpool2d(x: &Tensor) -> Result<(Tensor, Vec<usize>)> {
    let (c, h, w) = x.chw()?;
    let ow = w / 2;
    if ow == 0 {
        return Err(NnError::Shape(format!("max pool needs width >= 2, got {w}")));
    }
    let xd = x.data();
    let mut y = Vec::with_capacity(c * h * ow);
    let mut arg = Vec::with_capacity(c * h * ow);
    for row in 0..c * h {
        let base = row * w;
        for j in 0..ow {
            let (i0, i1) = (base + 2 * j, base + 2 * j + 1);
            let pick = if xd[i1] > xd[i0] { i1 } else { i0 };
            y.push(xd[pick]);
            arg.push(pick);
        }
    }
    Ok((Tensor::new(vec![c, h, ow], y)?, arg))
}

/// Routes each upstream gradient to the input cell that won the max.
pub fn maxpool2d_backward(dy: &Tensor, argmax: &[usize], input_shape: &[usize]) -> Result<Tensor> {
    if dy.len() != argmax.len() {
        return Err(NnError::Shape(format!(
            "max pool backward: {} gradients for {} pooled cells",
            dy.len(),
            argmax.len()
        )));
    }
    let mut dx = Tensor::zeros(input_shape);
    let d = dx.data_mut();
    for (&i, g) in argmax.iter().zip(dy.data()) {
        d[i] += g;
    }
    Ok(dx)
}

/// Non-overlapping mean over blocks of `k` columns, per row: brings 100 Hz
/// inertial rows down to the 5 Hz aiding rate when `k = 20`.
pub fn avgpool_rate_match(x: &Tensor, k: usize) -> Result<Tensor> {
    let (c, h, n) = x.chw()?;
    if k == 0 || n % k != 0 {
        return Err(NnError::Shape(format!(
            "rate-matching pool: width {n} is not a multiple of k = {k}"
        )));
    }
    let m = n / k;
    let inv = 1.0 / k as f64;
    let y = x
        .data()
        .chunks_exact(k)
        .map(|block| block.iter().sum::<f64>() * inv)
        .collect();
    let shape = if x.shape().len() == 2 { vec![h, m] } else { vec![c, h, m] };
    Tensor::new(shape, y)
}
