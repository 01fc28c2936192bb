//! Cutting recordings into HeadingNet input windows.
//!
//! A window of `T` seconds starting at aiding index `a` covers the aiding
//! samples `a+1 ..= a+5T` and the IMU samples between them, so its last
//! column and its label both sit at aiding index `a+5T`. A classical aligner
//! run on aiding samples `a ..= a+5T` therefore sees the same span and label.

use headalign_core::attitude::Angle;
use headalign_core::sim::Recording;
use headalign_core::strapdown::NavRateModel;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{NnError, Result};
use crate::layers::avgpool_rate_match;
use crate::model::INPUT_ROWS;
use crate::rng::{keyed_rng, Purpose};
use crate::tensor::Tensor;

pub const CHANNELS: usize = 2 * INPUT_ROWS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WindowMode {
    /// One-second stride, shuffled, statistics computed from the windows.
    Train,
    /// Stride equal to the window length, in time order.
    Eval,
}

/// Part of a recording to cut windows from, in seconds from its start.
#[derive(Debug, Clone, Copy)]
pub struct Segment<'a> {
    pub recording: &'a Recording,
    pub start: f64,
    pub end: f64,
}

impl<'a> Segment<'a> {
    pub fn new(recording: &'a Recording, start: f64, end: f64) -> Self {
        Segment { recording, start, end }
    }

    pub fn whole(recording: &'a Recording) -> Self {
        Segment {
            recording,
            start: 0.0,
            end: recording.duration(),
        }
    }
}

/// Per-channel standardization: channels 0–5 are head-1 rows, 6–11 head-2 rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl NormStats {
    pub fn identity() -> Self {
        NormStats {
            mean: vec![0.0; CHANNELS],
            std: vec![1.0; CHANNELS],
        }
    }

    /// Channels whose spread is negligible next to their level (e.g. gravity
    /// at a single latitude) get unit scale, so round-off is not amplified
    /// into a signal.
    fn from_sums(n: f64, sum: &[f64], sumsq: &[f64]) -> Self {
        let mut mean = vec![0.0; CHANNELS];
        let mut std = vec![1.0; CHANNELS];
        for c in 0..CHANNELS {
            let m = sum[c] / n;
            let var = (sumsq[c] / n - m * m).max(0.0);
            let s = var.sqrt();
            mean[c] = m;
            if s > 1e-6 * m.abs() && s > 0.0 {
                std[c] = s;
            }
        }
        NormStats { mean, std }
    }

    fn apply(&self, head: &mut Tensor, offset: usize) {
        let w = head.shape()[1];
        for (r, row) in head.data_mut().chunks_exact_mut(w).enumerate() {
            let (m, s) = (self.mean[offset + r], self.std[offset + r]);
            for v in row {
                *v = (*v - m) / s;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    /// `(6, 5T)`: gyro and specific-force rows, pooled to the aiding rate.
    pub head1: Tensor,
    /// `(6, 5T)`: navigation-frame rate and gravity rows at the aiding rate.
    pub head2: Tensor,
    /// Last aiding heading in the window.
    pub label: Angle,
    /// Index of the source segment.
    pub segment: usize,
    /// Aiding index `a` at which the window's span begins.
    pub first_aid: usize,
}

#[derive(Debug, Clone)]
pub struct WindowSet {
    pub windows: Vec<Window>,
    pub stats: NormStats,
    pub t_align: u32,
    pub mode: WindowMode,
}

impl WindowSet {
    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }
}

/// Aiding-index range `[first, last]` a segment covers.
fn aid_range(seg: &Segment) -> Result<(usize, usize)> {
    let rec = seg.recording;
    let rate = rec.aid_rate();
    let n = rec.aid.len();
    if n == 0 {
        return Err(NnError::InsufficientData(format!("recording '{}' has no aiding samples", rec.name())));
    }
    if !(seg.start >= 0.0 && seg.end >= seg.start) {
        return Err(NnError::InvalidArgument(format!(
            "segment [{}, {}] s of '{}' is malformed",
            seg.start,
            seg.end,
            rec.name()
        )));
    }
    let first = (seg.start * rate).round() as usize;
    let last = ((seg.end * rate).round() as usize).min(n - 1);
    Ok((first, last))
}

/// Start indices of the windows in one segment.
pub fn window_starts(seg: &Segment, t_align: u32, mode: WindowMode) -> Result<Vec<usize>> {
    let (first, last) = aid_range(seg)?;
    let rate = seg.recording.aid_rate() as usize;
    let len = rate * t_align as usize;
    if last < first + len {
        return Err(NnError::InsufficientData(format!(
            "segment [{}, {}] s of '{}' is shorter than a {t_align} s window",
            seg.start,
            seg.end,
            seg.recording.name()
        )));
    }
    let stride = match mode {
        WindowMode::Train => rate,
        WindowMode::Eval => len,
    };
    Ok((first..=last - len).step_by(stride).collect())
}

/// Unnormalized head inputs for the window starting at aiding index `a`.
fn extract(rec: &Recording, a: usize, t_align: u32, model: &NavRateModel) -> Result<(Tensor, Tensor)> {
    let ratio = rec.rate_ratio();
    let len = rec.aid_rate() as usize * t_align as usize;
    let imu = &rec.imu[a * ratio + 1..=(a + len) * ratio];
    let width = imu.len();
    let mut raw = vec![0.0; INPUT_ROWS * width];
    for (k, s) in imu.iter().enumerate() {
        for r in 0..3 {
            raw[r * width + k] = s.omega_ib_b[r];
            raw[(r + 3) * width + k] = s.f_b[r];
        }
    }
    let head1 = avgpool_rate_match(&Tensor::new(vec![INPUT_ROWS, width], raw)?, ratio)?;

    let mut nav = vec![0.0; INPUT_ROWS * len];
    for (m, s) in rec.aid[a + 1..=a + len].iter().enumerate() {
        let w = model.omega_in_n(s.lat)?;
        let g = model.g_n(s.lat)?;
        for r in 0..3 {
            nav[r * len + m] = w[r];
            nav[(r + 3) * len + m] = g[r];
        }
    }
    Ok((head1, Tensor::new(vec![INPUT_ROWS, len], nav)?))
}

/// Cuts every segment into windows.
///
/// Training sets compute fresh normalization statistics and are shuffled with
/// `seed`; evaluation sets must be given the statistics of the trained model.
pub fn make_windows(
    segments: &[Segment],
    t_align: u32,
    mode: WindowMode,
    seed: u64,
    stats: Option<&NormStats>,
) -> Result<WindowSet> {
    if !crate::model::VARIATIONS.contains(&t_align) {
        return Err(NnError::UnknownVariation(t_align));
    }
    if segments.is_empty() {
        return Err(NnError::InsufficientData("no recordings to window".into()));
    }
    let model = NavRateModel::default();
    let mut windows = Vec::new();
    for (si, seg) in segments.iter().enumerate() {
        let rec = seg.recording;
        for a in window_starts(seg, t_align, mode)? {
            let (head1, head2) = extract(rec, a, t_align, &model)?;
            let label = rec.aid[a + rec.aid_rate() as usize * t_align as usize].heading_gt;
            windows.push(Window {
                head1,
                head2,
                label,
                segment: si,
                first_aid: a,
            });
        }
    }

    let stats = match (mode, stats) {
        (_, Some(s)) => s.clone(),
        (WindowMode::Train, None) => {
            let mut sum = vec![0.0; CHANNELS];
            let mut sumsq = vec![0.0; CHANNELS];
            let mut n = 0.0;
            for w in &windows {
                for (offset, head) in [(0, &w.head1), (INPUT_ROWS, &w.head2)] {
                    let width = head.shape()[1];
                    for (r, row) in head.data().chunks_exact(width).enumerate() {
                        sum[offset + r] += row.iter().sum::<f64>();
                        sumsq[offset + r] += row.iter().map(|v| v * v).sum::<f64>();
                    }
                }
                n += w.head1.shape()[1] as f64;
            }
            NormStats::from_sums(n, &sum, &sumsq)
        }
        (WindowMode::Eval, None) => {
            return Err(NnError::InvalidArgument(
                "evaluation windows need the trained model's normalization statistics".into(),
            ))
        }
    };
    for w in &mut windows {
        stats.apply(&mut w.head1, 0);
        stats.apply(&mut w.head2, INPUT_ROWS);
    }
    if mode == WindowMode::Train {
        windows.shuffle(&mut keyed_rng(seed, 0, 0, Purpose::WindowShuffle));
    }
    Ok(WindowSet {
        windows,
        stats,
        t_align,
        mode,
    })
}
