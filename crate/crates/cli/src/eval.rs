//! Method × alignment-time sweeps over non-overlapping windows.
//!
//! Every method, classical or learned, is scored on the same window starts
//! (`window_starts` in eval mode), so a report compares like with like.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use headalign_core::aligners::{absolute_error_deg, align_window, AlignConfig, AlignMethod};
use headalign_core::sim::Recording;
use neuralkit::windows::window_starts;
use neuralkit::{make_windows, predict_heading, Model, Segment, WindowMode};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: &str = "1";
pub const NET_NAME: &str = "HeadingNet";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Classical(AlignMethod),
    /// The HeadingNet variation matching each alignment time.
    Net,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Classical(m) => m.name(),
            Method::Net => NET_NAME,
        }
    }

    pub fn all() -> Vec<Method> {
        AlignMethod::ALL.iter().map(|&m| Method::Classical(m)).chain([Method::Net]).collect()
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case(NET_NAME) || s.eq_ignore_ascii_case("nn") {
            return Ok(Method::Net);
        }
        s.parse::<AlignMethod>()
            .map(Method::Classical)
            .map_err(|_| CliError::Usage(format!("unknown method '{s}' (I-DVA, A-DVA, I-OBA, A-OBA, HeadingNet)")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordingRow {
    pub method: String,
    pub t_align: u32,
    pub recording: String,
    pub windows: usize,
    pub mean_ae_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AverageRow {
    pub method: String,
    pub t_align: u32,
    /// Mean over recordings of the per-recording means.
    pub mean_ae_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImprovementRow {
    pub t_align: u32,
    pub best_baseline_name: String,
    pub best_ae: f64,
    pub nn_ae: f64,
    pub improvement_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_version: String,
    /// Evaluated span of each recording, seconds from its start.
    pub start_s: f64,
    pub end_s: Option<f64>,
    pub rows: Vec<RecordingRow>,
    pub averages: Vec<AverageRow>,
    pub improvements: Vec<ImprovementRow>,
}

/// Lowest classical average; equal values go to the lexicographically first name.
pub fn best_baseline<'a>(candidates: impl IntoIterator<Item = (&'a str, f64)>) -> Option<(&'a str, f64)> {
    candidates.into_iter().fold(None, |best, (name, ae)| match best {
        Some((bn, bae)) if bae < ae || (bae == ae && bn <= name) => Some((bn, bae)),
        _ => Some((name, ae)),
    })
}

pub fn improvement_pct(best: f64, nn: f64) -> f64 {
    100.0 * (best - nn) / best
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub struct EvalRequest<'a> {
    pub recordings: &'a [Recording],
    pub methods: &'a [Method],
    pub t_aligns: &'a [u32],
    pub start: f64,
    pub end: Option<f64>,
    /// Trained networks by alignment time; required when `methods` has `Net`.
    pub models: &'a BTreeMap<u32, Model>,
}

fn net_errors(model: &Model, seg: &Segment, t: u32, starts: &[usize]) -> Result<Vec<f64>> {
    let norm = model.norm().ok_or_else(|| {
        CliError::Usage(format!("HeadingNet{t} has no normalization statistics; was it trained?"))
    })?;
    let ws = make_windows(std::slice::from_ref(seg), t, WindowMode::Eval, 0, Some(norm))?;
    let got: Vec<usize> = ws.windows.iter().map(|w| w.first_aid).collect();
    assert_eq!(got, starts, "network and classical windows diverged");
    ws.windows
        .par_iter()
        .map(|w| Ok(absolute_error_deg(predict_heading(model, w)?, w.label)))
        .collect()
}

fn classical_errors(method: AlignMethod, rec: &Recording, t: u32, starts: &[usize]) -> Result<Vec<f64>> {
    let len = rec.aid_rate() as usize * t as usize;
    let cfg = AlignConfig::default();
    starts
        .par_iter()
        .map(|&a| {
            let (imu, aid) = rec.window_by_index(a, a + len)?;
            Ok(align_window(imu, aid, method, &cfg)?.ae)
        })
        .collect()
}

pub fn evaluate(req: &EvalRequest) -> Result<EvalReport> {
    if req.methods.is_empty() {
        return Err(CliError::Usage("no methods to evaluate".into()));
    }
    if req.t_aligns.is_empty() {
        return Err(CliError::Usage("no alignment times to evaluate".into()));
    }
    if req.recordings.is_empty() {
        return Err(CliError::Usage("no recordings to evaluate".into()));
    }
    if req.methods.contains(&Method::Net) {
        for &t in req.t_aligns {
            let m = req.models.get(&t).ok_or(CliError::MissingCheckpoint {
                t_align: t,
                path: format!("headingnet{t}.ckpt").into(),
            })?;
            if m.config().t_align != t {
                return Err(CliError::Usage(format!(
                    "model supplied for {t} s is HeadingNet{}",
                    m.config().t_align
                )));
            }
        }
    }

    let mut rows = Vec::new();
    let mut averages = Vec::new();
    for &method in req.methods {
        for &t in req.t_aligns {
            let mut per_rec = Vec::with_capacity(req.recordings.len());
            for rec in req.recordings {
                let seg = Segment::new(rec, req.start, req.end.unwrap_or_else(|| rec.duration()));
                let starts = window_starts(&seg, t, WindowMode::Eval)?;
                let errs = match method {
                    Method::Classical(m) => classical_errors(m, rec, t, &starts)?,
                    Method::Net => net_errors(&req.models[&t], &seg, t, &starts)?,
                };
                let m = mean(&errs);
                per_rec.push(m);
                rows.push(RecordingRow {
                    method: method.name().into(),
                    t_align: t,
                    recording: rec.name().into(),
                    windows: errs.len(),
                    mean_ae_deg: m,
                });
            }
            averages.push(AverageRow {
                method: method.name().into(),
                t_align: t,
                mean_ae_deg: mean(&per_rec),
            });
        }
    }

    let improvements = improvements(&averages);
    Ok(EvalReport {
        schema_version: SCHEMA_VERSION.into(),
        start_s: req.start,
        end_s: req.end,
        rows,
        averages,
        improvements,
    })
}

/// One row per alignment time that has both a network and a classical average.
pub fn improvements(averages: &[AverageRow]) -> Vec<ImprovementRow> {
    let mut by_t: BTreeMap<u32, Vec<&AverageRow>> = BTreeMap::new();
    for a in averages {
        by_t.entry(a.t_align).or_default().push(a);
    }
    let mut out = Vec::new();
    for (t, rows) in by_t {
        let Some(nn) = rows.iter().find(|r| r.method == NET_NAME) else {
            continue;
        };
        let classical = rows.iter().filter(|r| r.method != NET_NAME).map(|r| (r.method.as_str(), r.mean_ae_deg));
        if let Some((name, best)) = best_baseline(classical) {
            out.push(ImprovementRow {
                t_align: t,
                best_baseline_name: name.into(),
                best_ae: best,
                nn_ae: nn.mean_ae_deg,
                improvement_pct: improvement_pct(best, nn.mean_ae_deg),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn best_baseline_tiebreak() {
        let c = [("I-OBA", 1.26), ("I-DVA", 0.98), ("A-OBA", 0.98)];
        assert_eq!(best_baseline(c), Some(("A-OBA", 0.98)));
        assert_eq!(best_baseline([("B", 2.0), ("A", 3.0)]), Some(("B", 2.0)));
        assert_eq!(best_baseline(std::iter::empty::<(&str, f64)>()), None);
    }

    #[test]
    fn improvement_definition() {
        assert_eq!(improvement_pct(2.0, 2.0), 0.0);
        assert_eq!(improvement_pct(4.0, 1.0), 75.0);
        assert!(improvement_pct(1.0, 1.5) < 0.0);
    }

    #[test]
    fn method_names_parse() {
        assert_eq!("i-oba".parse::<Method>().unwrap(), Method::Classical(AlignMethod::IOba));
        assert_eq!("HeadingNet".parse::<Method>().unwrap(), Method::Net);
        assert!(matches!("X".parse::<Method>(), Err(CliError::Usage(_))));
    }
}
