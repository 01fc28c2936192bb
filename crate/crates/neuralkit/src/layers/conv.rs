//! Valid (unpadded, stride-1) 2-D cross-correlation.

use crate::error::{NnError, Result};
use crate::tensor::Tensor;

/// Gradients of one convolution.
#[derive(Debug, Clone)]
pub struct ConvGrads {
    pub dx: Tensor,
    pub dw: Tensor,
    pub db: Tensor,
}

fn kernel_dims(w: &Tensor) -> Result<(usize, usize, usize, usize)> {
    match *w.shape() {
        [co, ci, kh, kw] => Ok((co, ci, kh, kw)),
        _ => Err(NnError::Shape(format!(
            "conv weights must be (C_out, C_in, kh, kw), got {:?}",
            w.shape()
        ))),
    }
}

fn check(x: &Tensor, w: &Tensor, b: &Tensor) -> Result<(usize, usize, usize, usize, usize, usize)> {
    let (c, h, wd) = x.chw()?;
    let (co, ci, kh, kw) = kernel_dims(w)?;
    if ci != c {
        return Err(NnError::Shape(format!(
            "conv expects {ci} input channels, got {c}"
        )));
    }
    if b.len() != co {
        return Err(NnError::Shape(format!("conv bias has {} entries for {co} filters", b.len())));
    }
    if kh > h || kw > wd {
        return Err(NnError::Shape(format!(
            "kernel {kh}x{kw} is larger than the {h}x{wd} input"
        )));
    }
    Ok((c, h, wd, co, kh, kw))
}

/// `y[o, i, j] = b[o] + Σ_c Σ_α Σ_β w[o, c, α, β] · x[c, i+α, j+β]`.
///
/// `x` is `(C, H, W)` (or `(H, W)` for a single channel); the output is
/// `(C_out, H − kh + 1, W − kw + 1)`.
pub fn conv2d(x: &Tensor, w: &Tensor, b: &Tensor) -> Result<Tensor> {
    let (c, h, wd, co, kh, kw) = check(x, w, b)?;
    let (oh, ow) = (h - kh + 1, wd - kw + 1);
    let xd = x.data();
    let wdat = w.data();
    let mut y = vec![0.0; co * oh * ow];
    for o in 0..co {
        let out = &mut y[o * oh * ow..(o + 1) * oh * ow];
        out.fill(b.data()[o]);
        for ci in 0..c {
            for a in 0..kh {
                for bb in 0..kw {
                    let k = wdat[((o * c + ci) * kh + a) * kw + bb];
                    for i in 0..oh {
                        let src = &xd[(ci * h + i + a) * wd + bb..][..ow];
                        let dst = &mut out[i * ow..(i + 1) * ow];
                        for (d, s) in dst.iter_mut().zip(src) {
                            *d += k * s;
                        }
                    }
                }
            }
        }
    }
    Tensor::new(vec![co, oh, ow], y)
}

/// Gradients of [`conv2d`] given the upstream gradient `dy`.
pub fn conv2d_backward(x: &Tensor, w: &Tensor, dy: &Tensor) -> Result<ConvGrads> {
    let (c, h, wd) = x.chw()?;
    let (co, ci, kh, kw) = kernel_dims(w)?;
    let (oh, ow) = (h + 1 - kh, wd + 1 - kw);
    if ci != c || dy.shape() != [co, oh, ow] {
        return Err(NnError::Shape(format!(
            "conv backward: upstream gradient {:?} does not match output ({co}, {oh}, {ow})",
            dy.shape()
        )));
    }
    let xd = x.data();
    let wdat = w.data();
    let g = dy.data();
    let mut dx = vec![0.0; c * h * wd];
    let mut dw = vec![0.0; wdat.len()];
    let mut db = vec![0.0; co];
    for o in 0..co {
        let go = &g[o * oh * ow..(o + 1) * oh * ow];
        db[o] = go.iter().sum();
        for cc in 0..c {
            for a in 0..kh {
                for bb in 0..kw {
                    let widx = ((o * c + cc) * kh + a) * kw + bb;
                    let k = wdat[widx];
                    let mut acc = 0.0;
                    for i in 0..oh {
                        let row = (cc * h + i + a) * wd + bb;
                        let src = &xd[row..row + ow];
                        let gi = &go[i * ow..(i + 1) * ow];
                        let dst = &mut dx[row..row + ow];
                        for ((d, s), gv) in dst.iter_mut().zip(src).zip(gi) {
                            acc += gv * s;
                            *d += k * gv;
                        }
                    }
                    dw[widx] = acc;
                }
            }
        }
    }
    Ok(ConvGrads {
        dx: Tensor::new(vec![c, h, wd], dx)?,
        dw: Tensor::new(w.shape().to_vec(), dw)?,
        db: Tensor::vector(db),
    })
}
