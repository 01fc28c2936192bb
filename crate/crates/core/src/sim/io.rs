//! On-disk recording format: `<stem>.imu.csv`, `<stem>.aid.csv`, `<stem>.meta.json`.
//!
//! Floats are written with 17 significant digits so every value reads back
//! bit-identically. The truth track is not stored; it is regenerated from the
//! scenario in the metadata.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::Vector3;

use super::{simulate_truth, Recording, RecordingMeta, FORMAT_VERSION};
use crate::attitude::Angle;
use crate::error::{Error, Result};
use crate::strapdown::{ImuSample, NavAidSample};

pub const IMU_HEADER: &str = "t,wx,wy,wz,fx,fy,fz";
pub const AID_HEADER: &str = "t,lat,lon,heading_gt";

const SPACING_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordingPaths {
    pub imu: PathBuf,
    pub aid: PathBuf,
    pub meta: PathBuf,
}

/// File names for a recording stem such as `out/S1`.
pub fn recording_paths(stem: &Path) -> RecordingPaths {
    let with = |suffix: &str| {
        let mut s = stem.as_os_str().to_owned();
        s.push(suffix);
        PathBuf::from(s)
    };
    RecordingPaths {
        imu: with(".imu.csv"),
        aid: with(".aid.csv"),
        meta: with(".meta.json"),
    }
}

fn num(out: &mut String, v: f64) {
    // 17 significant digits
    let _ = write!(out, "{v:.16e}");
}

fn row(out: &mut String, values: &[f64]) {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        num(out, *v);
    }
    out.push('\n');
}

pub fn write_recording(rec: &Recording, stem: &Path) -> Result<RecordingPaths> {
    let paths = recording_paths(stem);
    if let Some(dir) = stem.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }

    let mut imu = String::with_capacity(rec.imu.len() * 170);
    imu.push_str(IMU_HEADER);
    imu.push('\n');
    for s in &rec.imu {
        let w = s.omega_ib_b;
        let f = s.f_b;
        row(&mut imu, &[s.t, w.x, w.y, w.z, f.x, f.y, f.z]);
    }
    fs::write(&paths.imu, imu).map_err(|e| Error::io(&paths.imu, e))?;

    let mut aid = String::with_capacity(rec.aid.len() * 100);
    aid.push_str(AID_HEADER);
    aid.push('\n');
    for a in &rec.aid {
        row(&mut aid, &[a.t, a.lat, a.lon, a.heading_gt.radians()]);
    }
    fs::write(&paths.aid, aid).map_err(|e| Error::io(&paths.aid, e))?;

    let mut meta = serde_json::to_string_pretty(&rec.meta).map_err(|e| Error::Meta(e.to_string()))?;
    meta.push('\n');
    fs::write(&paths.meta, meta).map_err(|e| Error::io(&paths.meta, e))?;
    Ok(paths)
}

/// Parses a CSV with a fixed header into rows of `N` floats, citing 1-based
/// line numbers in errors.
fn parse_csv<const N: usize>(path: &Path, header: &str) -> Result<Vec<(usize, [f64; N])>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    if !text.ends_with('\n') {
        let line = text.lines().count().max(1);
        return Err(err(line, "final line is not newline-terminated (truncated file?)".into()));
    }
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end() == header => {}
        Some((_, h)) => return Err(err(1, format!("expected header '{header}', found '{h}'"))),
        None => return Err(err(1, "empty file".into())),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let lineno = i + 1;
        let fields: Vec<&str> = line.trim_end().split(',').collect();
        if fields.len() != N {
            return Err(err(lineno, format!("expected {N} fields, found {}", fields.len())));
        }
        let mut vals = [0.0; N];
        for (slot, field) in vals.iter_mut().zip(&fields) {
            *slot = field
                .trim()
                .parse::<f64>()
                .map_err(|e| err(lineno, format!("bad number '{field}': {e}")))?;
            if !slot.is_finite() {
                return Err(err(lineno, format!("non-finite value '{field}'")));
            }
        }
        rows.push((lineno, vals));
    }
    Ok(rows)
}

fn check_timing<const N: usize>(path: &Path, rows: &[(usize, [f64; N])], rate: f64) -> Result<()> {
    let step = 1.0 / rate;
    for w in rows.windows(2) {
        let (line, t) = (w[1].0, w[1].1[0]);
        let prev = w[0].1[0];
        let err = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };
        if !(t > prev) {
            return Err(err(format!("timestamp {t} does not increase (previous {prev})")));
        }
        if ((t - prev) - step).abs() > SPACING_TOL {
            return Err(err(format!(
                "sample spacing {} s does not match the {rate} Hz rate",
                t - prev
            )));
        }
    }
    Ok(())
}

pub fn read_recording(stem: &Path) -> Result<Recording> {
    let paths = recording_paths(stem);
    let meta_text = fs::read_to_string(&paths.meta).map_err(|e| Error::io(&paths.meta, e))?;
    let meta: RecordingMeta = serde_json::from_str(&meta_text).map_err(|e| Error::Parse {
        path: paths.meta.clone(),
        line: e.line(),
        msg: e.to_string(),
    })?;
    if meta.format_version != FORMAT_VERSION {
        return Err(Error::Meta(format!(
            "{}: unsupported format version '{}'",
            paths.meta.display(),
            meta.format_version
        )));
    }
    meta.scenario.validate()?;
    let scenario = &meta.scenario;

    let imu_rows = parse_csv::<7>(&paths.imu, IMU_HEADER)?;
    check_timing(&paths.imu, &imu_rows, scenario.imu_rate as f64)?;
    let aid_rows = parse_csv::<4>(&paths.aid, AID_HEADER)?;
    check_timing(&paths.aid, &aid_rows, scenario.aid_rate as f64)?;

    let ratio = scenario.rate_ratio();
    for (j, (line, r)) in aid_rows.iter().enumerate() {
        let k = j * ratio;
        let matches = imu_rows.get(k).is_some_and(|(_, s)| (s[0] - r[0]).abs() <= 1e-9);
        if !matches {
            return Err(Error::Parse {
                path: paths.aid.clone(),
                line: *line,
                msg: format!("aiding timestamp {} has no IMU sample at index {k}", r[0]),
            });
        }
        if r[1].abs() > std::f64::consts::FRAC_PI_2 {
            return Err(Error::Parse {
                path: paths.aid.clone(),
                line: *line,
                msg: format!("latitude {} rad out of range", r[1]),
            });
        }
    }

    let imu: Vec<ImuSample> = imu_rows
        .iter()
        .map(|(_, r)| ImuSample {
            t: r[0],
            omega_ib_b: Vector3::new(r[1], r[2], r[3]),
            f_b: Vector3::new(r[4], r[5], r[6]),
        })
        .collect();
    let aid: Vec<NavAidSample> = aid_rows
        .iter()
        .map(|(_, r)| NavAidSample {
            t: r[0],
            lat: r[1],
            lon: r[2],
            heading_gt: Angle::new(r[3]),
        })
        .collect();

    let truth = simulate_truth(scenario)?;
    if truth.len() != imu.len() {
        return Err(Error::Meta(format!(
            "{}: scenario implies {} IMU samples but the file has {}",
            paths.meta.display(),
            truth.len(),
            imu.len()
        )));
    }
    Ok(Recording { imu, aid, truth, meta })
}
