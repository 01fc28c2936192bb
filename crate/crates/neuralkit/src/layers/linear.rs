use crate::error::{NnError, Result};
use crate::tensor::Tensor;

#[derive(Debug, Clone)]
pub struct LinearGrads {
    pub dx: Tensor,
    pub dw: Tensor,
    pub db: Tensor,
}

fn dims(x: &Tensor, w: &Tensor) -> Result<(usize, usize)> {
    let [out, inp] = *w.shape() else {
        return Err(NnError::Shape(format!("linear weights must be (out, in), got {:?}", w.shape())));
    };
    if x.len() != inp {
        return Err(NnError::Shape(format!("linear layer expects {inp} inputs, got {}", x.len())));
    }
    Ok((out, inp))
}

/// `z_i = Σ_j W_ij x_j + b_i`; `x` is read flat whatever its shape.
pub fn linear(x: &Tensor, w: &Tensor, b: &Tensor) -> Result<Tensor> {
    let (out, inp) = dims(x, w)?;
    if b.len() != out {
        return Err(NnError::Shape(format!("linear bias has {} entries for {out} outputs", b.len())));
    }
    let xd = x.data();
    let z = w
        .data()
        .chunks_exact(inp)
        .zip(b.data())
        .map(|(row, bi)| row.iter().zip(xd).map(|(a, c)| a * c).sum::<f64>() + bi)
        .collect();
    Ok(Tensor::vector(z))
}

/// Gradients of [`linear`]; `dx` takes the shape of `x`.
pub fn linear_backward(x: &Tensor, w: &Tensor, dz: &Tensor) -> Result<LinearGrads> {
    let (out, inp) = dims(x, w)?;
    if dz.len() != out {
        return Err(NnError::Shape(format!("linear backward: {} gradients for {out} outputs", dz.len())));
    }
    let xd = x.data();
    let mut dx = vec![0.0; inp];
    let mut dw = vec![0.0; out * inp];
    for ((row, drow), &g) in w.data().chunks_exact(inp).zip(dw.chunks_exact_mut(inp)).zip(dz.data()) {
        for j in 0..inp {
            dx[j] += row[j] * g;
            drow[j] = g * xd[j];
        }
    }
    Ok(LinearGrads {
        dx: Tensor::new(x.shape().to_vec(), dx)?,
        dw: Tensor::new(vec![out, inp], dw)?,
        db: Tensor::vector(dz.data().to_vec()),
    })
}
