//! AdamW with decoupled weight decay, and a step learning-rate schedule.

use serde::{Deserialize, Serialize};

use crate::error::{NnError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamWParams {
    pub lr: f64,
    pub weight_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamWParams {
    pub fn new(lr: f64, weight_decay: f64) -> Self {
        AdamWParams {
            lr,
            weight_decay,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First and second moment estimates for every parameter block.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamWState {
    pub m: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub step: u64,
}

impl AdamWState {
    /// Zero moments shaped like `params`.
    pub fn new(params: &[Vec<f64>]) -> Self {
        AdamWState {
            m: params.iter().map(|p| vec![0.0; p.len()]).collect(),
            v: params.iter().map(|p| vec![0.0; p.len()]).collect(),
            step: 0,
        }
    }
}

/// One update: bias-corrected moment step, then the decoupled decay
/// `θ ← θ − η·wd·θ`.
pub fn adamw_step(params: &mut [Vec<f64>], grads: &[Vec<f64>], state: &mut AdamWState, hp: &AdamWParams) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.m.len() {
        return Err(NnError::Shape(format!(
            "AdamW: {} parameter blocks, {} gradient blocks, {} state blocks",
            params.len(),
            grads.len(),
            state.m.len()
        )));
    }
    for (i, (p, g)) in params.iter().zip(grads).enumerate() {
        if p.len() != g.len() || p.len() != state.m[i].len() {
            return Err(NnError::Shape(format!(
                "AdamW: block {i} has {} parameters but {} gradients",
                p.len(),
                g.len()
            )));
        }
    }
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - hp.beta1.powi(t);
    let c2 = 1.0 - hp.beta2.powi(t);
    let decay = hp.lr * hp.weight_decay;
    for (((p, g), m), v) in params.iter_mut().zip(grads).zip(&mut state.m).zip(&mut state.v) {
        for j in 0..p.len() {
            m[j] = hp.beta1 * m[j] + (1.0 - hp.beta1) * g[j];
            v[j] = hp.beta2 * v[j] + (1.0 - hp.beta2) * g[j] * g[j];
            let m_hat = m[j] / c1;
            let v_hat = v[j] / c2;
            p[j] -= hp.lr * m_hat / (v_hat.sqrt() + hp.eps);
            p[j] -= decay * p[j];
        }
    }
    Ok(())
}

/// `lr0 · γ^⌊epoch / step_size⌋`.
pub fn steplr(lr0: f64, gamma: f64, step_size: usize, epoch: usize) -> Result<f64> {
    if step_size == 0 {
        return Err(NnError::InvalidArgument("scheduler step size must be at least 1".into()));
    }
    Ok(lr0 * gamma.powi((epoch / step_size) as i32))
}
