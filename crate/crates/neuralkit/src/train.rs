//! Minibatch training and inference.
//!
//! Each batch is split into fixed chunks of [`CHUNK`] windows. Chunks run in
//! parallel, each summing its per-window gradients in window order; the chunk
//! sums are then added in chunk order. The summation tree therefore depends
//! only on the batch size, never on the number of worker threads.

use std::io::Write;
use std::path::Path;

use headalign_core::attitude::Angle;
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{NnError, Result};
use crate::loss::cmse_loss;
use crate::model::{eval_rng, Model};
use crate::optim::{adamw_step, steplr, AdamWParams, AdamWState};
use crate::rng::{keyed_rng, Purpose};
use crate::windows::{Window, WindowMode, WindowSet};

pub const CHUNK: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch: usize,
    /// λ of the cyclic loss.
    pub loss_scale: f64,
    pub lr: f64,
    pub weight_decay: f64,
    pub scheduler_step: usize,
    pub gamma: f64,
    pub seed: u64,
}

impl TrainConfig {
    /// Reference hyperparameters for one variation.
    pub fn for_variation(t_align: u32, seed: u64) -> Result<Self> {
        let (epochs, loss_scale, lr, weight_decay, scheduler_step) = match t_align {
            10 => (1000, 10.0, 0.0009, 0.08, 120),
            30 => (1000, 10.0, 0.0008, 0.08, 120),
            60 => (400, 10.0, 0.0008, 0.08, 80),
            90 => (500, 100.0, 0.0005, 0.8, 150),
            120 => (300, 10.0, 0.0006, 0.08, 50),
            other => return Err(NnError::UnknownVariation(other)),
        };
        Ok(TrainConfig {
            epochs,
            batch: 512,
            loss_scale,
            lr,
            weight_decay,
            scheduler_step,
            gamma: 0.8,
            seed,
        })
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(NnError::InvalidArgument(msg));
        if self.batch == 0 {
            return bad("batch size must be at least 1".into());
        }
        if self.scheduler_step == 0 {
            return bad("scheduler step must be at least 1".into());
        }
        for (name, v) in [
            ("loss scale", self.loss_scale),
            ("learning rate", self.lr),
            ("weight decay", self.weight_decay),
            ("gamma", self.gamma),
        ] {
            if !v.is_finite() || v < 0.0 {
                return bad(format!("{name} must be finite and non-negative, got {v}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    pub lr: f64,
    /// Mean per-window loss `λ·err²` over the epoch, dropout active.
    pub train_loss: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub epochs: Vec<EpochRecord>,
}

impl History {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("epoch,lr,train_loss\n");
        for r in &self.epochs {
            s.push_str(&format!("{},{:e},{:.12e}\n", r.epoch, r.lr, r.train_loss));
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path).map_err(|e| NnError::io(path, e))?;
        f.write_all(self.to_csv().as_bytes()).map_err(|e| NnError::io(path, e))
    }
}

struct ChunkResult {
    loss: f64,
    grads: Vec<Vec<f64>>,
}

fn sample_rng(seed: u64, epoch: usize, batch: usize, position: usize) -> ChaCha8Rng {
    let mut rng = keyed_rng(seed, epoch as u64, batch as u64, Purpose::Dropout);
    rng.set_stream(position as u64);
    rng
}

/// Loss and gradient sum of one batch, `loss = λ/N Σ err²`.
pub fn batch_gradient(
    model: &Model,
    batch: &[&Window],
    loss_scale: f64,
    seed: u64,
    epoch: usize,
    batch_index: usize,
) -> Result<(f64, Vec<Vec<f64>>)> {
    let scale = loss_scale / batch.len() as f64;
    let tag = |e: NnError| match e {
        NnError::NonFinite { layer, loss, .. } => NnError::NonFinite {
            epoch: epoch + 1,
            batch: batch_index,
            layer,
            loss,
        },
        other => other,
    };
    let chunks: Vec<Result<ChunkResult>> = batch
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(ci, chunk)| {
            let mut grads = model.zero_grads();
            let mut loss = 0.0;
            for (k, w) in chunk.iter().enumerate() {
                let mut rng = sample_rng(seed, epoch, batch_index, ci * CHUNK + k);
                let (pred, tape) = model.forward(&w.head1, &w.head2, &mut rng).map_err(tag)?;
                let (l, g) = cmse_loss(&[pred], &[w.label.radians()], scale)?;
                model.backward(&tape, g[0], &mut grads)?;
                loss += l;
            }
            Ok(ChunkResult { loss, grads })
        })
        .collect();

    let mut total = model.zero_grads();
    let mut loss = 0.0;
    for c in chunks {
        let c = c?;
        loss += c.loss;
        for (t, g) in total.iter_mut().zip(&c.grads) {
            for (a, b) in t.iter_mut().zip(g) {
                *a += b;
            }
        }
    }
    if !loss.is_finite() {
        return Err(NnError::NonFinite {
            epoch: epoch + 1,
            batch: batch_index,
            layer: "loss".into(),
            loss,
        });
    }
    if let Some(i) = total.iter().position(|g| g.iter().any(|v| !v.is_finite())) {
        return Err(NnError::NonFinite {
            epoch: epoch + 1,
            batch: batch_index,
            layer: model.params()[i].name.clone(),
            loss,
        });
    }
    Ok((loss, total))
}

/// Trains `model` on `windows` and returns it in evaluation mode with the
/// windows' normalization statistics attached.
pub fn train(mut model: Model, windows: &WindowSet, cfg: &TrainConfig) -> Result<(Model, History)> {
    cfg.validate()?;
    if windows.is_empty() {
        return Err(NnError::InsufficientData("empty training set".into()));
    }
    if windows.mode != WindowMode::Train {
        return Err(NnError::InvalidArgument("training needs a train-mode window set".into()));
    }
    if windows.t_align != model.config().t_align {
        return Err(NnError::InvalidArgument(format!(
            "{} s windows for HeadingNet{}",
            windows.t_align,
            model.config().t_align
        )));
    }
    model.train_mode();
    let mut blocks = model.param_blocks();
    let mut state = AdamWState::new(&blocks);
    let mut history = History::default();
    let mut order: Vec<usize> = (0..windows.len()).collect();

    for epoch in 0..cfg.epochs {
        let lr = steplr(cfg.lr, cfg.gamma, cfg.scheduler_step, epoch)?;
        let hp = AdamWParams::new(lr, cfg.weight_decay);
        order.shuffle(&mut keyed_rng(cfg.seed, epoch as u64, 0, Purpose::EpochShuffle));
        let mut epoch_loss = 0.0;
        for (bi, idx) in order.chunks(cfg.batch).enumerate() {
            let batch: Vec<&Window> = idx.iter().map(|&i| &windows.windows[i]).collect();
            let (loss, grads) = batch_gradient(&model, &batch, cfg.loss_scale, cfg.seed, epoch, bi)?;
            epoch_loss += loss * batch.len() as f64;
            adamw_step(&mut blocks, &grads, &mut state, &hp)?;
            model.set_param_blocks(blocks.clone())?;
        }
        let rec = EpochRecord {
            epoch: epoch + 1,
            lr,
            train_loss: epoch_loss / windows.len() as f64,
        };
        log::info!("epoch {} lr {:.3e} loss {:.6}", rec.epoch, rec.lr, rec.train_loss);
        history.epochs.push(rec);
    }
    model.set_norm(windows.stats.clone());
    model.eval_mode();
    Ok((model, history))
}

/// Heading estimate at the end of `window`, wrapped to (−π, π].
pub fn predict_heading(model: &Model, window: &Window) -> Result<Angle> {
    if model.is_training() {
        return Err(NnError::InvalidArgument("prediction needs a model in evaluation mode".into()));
    }
    let (out, _) = model.forward(&window.head1, &window.head2, &mut eval_rng())?;
    Ok(Angle::new(out))
}
