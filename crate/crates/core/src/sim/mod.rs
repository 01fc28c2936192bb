//! Moored-vessel motion and sensor simulator.
//!
//! Attitude is a superposition of sinusoids per Euler axis around
//! `(psi0, 0, 0)`. Body rates are analytic (Euler-rate mapping plus Earth
//! rate) and specific force is the quasi-stationary `f^b = −C^b_n g^n`, so a
//! noise-free recording satisfies the alignment model exactly.

mod io;

pub use io::{read_recording, recording_paths, write_recording, RecordingPaths};

use std::f64::consts::TAU;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::attitude::{Angle, Euler};
use crate::error::{Error, Result};
use crate::strapdown::{ImuSample, NavAidSample, NavRateModel};

pub const FORMAT_VERSION: &str = "1";

/// Standard gravity used to convert µg specifications.
pub const STANDARD_GRAVITY: f64 = 9.80665;
const EARTH_RADIUS: f64 = 6_378_137.0;

/// One sinusoidal motion component `amplitude · sin(2πt/period + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Oscillation {
    pub amplitude_deg: f64,
    pub period_s: f64,
    #[serde(default)]
    pub phase_rad: f64,
}

impl Oscillation {
    pub fn new(amplitude_deg: f64, period_s: f64, phase_rad: f64) -> Self {
        Oscillation {
            amplitude_deg,
            period_s,
            phase_rad,
        }
    }

    /// Value and first derivative at `t`, radians and rad/s.
    fn eval(&self, t: f64) -> (f64, f64) {
        let a = self.amplitude_deg.to_radians();
        let w = TAU / self.period_s;
        let arg = w * t + self.phase_rad;
        (a * arg.sin(), a * w * arg.cos())
    }
}

fn sum_oscillations(list: &[Oscillation], t: f64) -> (f64, f64) {
    list.iter().fold((0.0, 0.0), |(v, d), o| {
        let (ov, od) = o.eval(t);
        (v + ov, d + od)
    })
}

fn default_imu_rate() -> u32 {
    100
}

fn default_aid_rate() -> u32 {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    /// Seconds.
    pub duration: f64,
    /// Radians.
    pub lat: f64,
    /// Radians.
    pub lon: f64,
    /// Mean heading.
    pub psi0: Angle,
    #[serde(default)]
    pub heading_osc: Vec<Oscillation>,
    #[serde(default)]
    pub roll_osc: Vec<Oscillation>,
    #[serde(default)]
    pub pitch_osc: Vec<Oscillation>,
    #[serde(default = "default_imu_rate")]
    pub imu_rate: u32,
    #[serde(default = "default_aid_rate")]
    pub aid_rate: u32,
    pub seed: u64,
}

impl ScenarioConfig {
    /// A motionless vessel; useful as a starting point for tests.
    pub fn still(name: &str, duration: f64, lat: f64, psi0: Angle, seed: u64) -> Self {
        ScenarioConfig {
            name: name.into(),
            duration,
            lat,
            lon: 34.95f64.to_radians(),
            psi0,
            heading_osc: Vec::new(),
            roll_osc: Vec::new(),
            pitch_osc: Vec::new(),
            imu_rate: default_imu_rate(),
            aid_rate: default_aid_rate(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, why: String| Err(Error::InvalidArgument(format!("scenario '{}': {field} {why}", self.name)));
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return bad("duration", format!("must be positive, got {}", self.duration));
        }
        if !(self.lat.abs() <= std::f64::consts::FRAC_PI_2) {
            return bad("lat", format!("outside [-pi/2, pi/2]: {}", self.lat));
        }
        if !self.lon.is_finite() || !self.psi0.radians().is_finite() {
            return bad("lon/psi0", "must be finite".into());
        }
        if self.imu_rate == 0 || self.aid_rate == 0 {
            return bad("imu_rate/aid_rate", "must be positive".into());
        }
        if self.imu_rate % self.aid_rate != 0 {
            return bad(
                "imu_rate",
                format!("{} is not an integer multiple of aid_rate {}", self.imu_rate, self.aid_rate),
            );
        }
        for (axis, list) in [("heading_osc", &self.heading_osc), ("roll_osc", &self.roll_osc), ("pitch_osc", &self.pitch_osc)] {
            for o in list {
                if !(o.period_s > 0.0) || !o.amplitude_deg.is_finite() || !o.phase_rad.is_finite() {
                    return bad(axis, format!("has an invalid component {o:?}"));
                }
            }
        }
        Ok(())
    }

    /// IMU samples per aiding sample.
    pub fn rate_ratio(&self) -> usize {
        (self.imu_rate / self.aid_rate) as usize
    }

    pub fn imu_count(&self) -> usize {
        let ratio = self.rate_ratio();
        let aid_steps = (self.duration * self.aid_rate as f64).round() as usize;
        aid_steps * ratio + 1
    }

    pub fn imu_time(&self, k: usize) -> f64 {
        k as f64 / self.imu_rate as f64
    }

    /// Euler angles and their rates at `t`.
    pub fn attitude_at(&self, t: f64) -> (Euler, Euler) {
        let (h, hd) = sum_oscillations(&self.heading_osc, t);
        let (r, rd) = sum_oscillations(&self.roll_osc, t);
        let (p, pd) = sum_oscillations(&self.pitch_osc, t);
        (
            Euler::new(self.psi0.radians() + h, p, r),
            Euler::new(hd, pd, rd),
        )
    }
}

/// Gyro/accelerometer/GNSS error magnitudes in datasheet units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorSpec {
    /// deg/s
    pub gyro_bias_instability: f64,
    /// deg/√hr
    pub gyro_arw: f64,
    /// µg
    pub accel_bias: f64,
    /// m/s/√hr
    pub accel_vrw: f64,
    /// deg
    pub gnss_heading_sigma: f64,
    /// m
    pub gnss_pos_sigma: f64,
}

impl SensorSpec {
    pub fn noise_free() -> Self {
        SensorSpec {
            gyro_bias_instability: 0.0,
            gyro_arw: 0.0,
            accel_bias: 0.0,
            accel_vrw: 0.0,
            gnss_heading_sigma: 0.0,
            gnss_pos_sigma: 0.0,
        }
    }

    /// The moored-ASV sensor suite: tactical IMU plus dual-antenna RTK.
    pub fn table3() -> Self {
        SensorSpec {
            gyro_bias_instability: 0.02,
            gyro_arw: 0.032,
            accel_bias: 1000.0,
            accel_vrw: 0.012,
            gnss_heading_sigma: 0.09,
            gnss_pos_sigma: 0.008,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.gyro_bias_instability,
            self.gyro_arw,
            self.accel_bias,
            self.accel_vrw,
            self.gnss_heading_sigma,
            self.gnss_pos_sigma,
        ];
        if all.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("sensor spec values must be non-negative: {self:?}")));
        }
        Ok(())
    }

    /// Per-sample white gyro noise σ in rad/s at `rate` Hz.
    pub fn gyro_white_sigma(&self, rate: f64) -> f64 {
        self.gyro_arw.to_radians() / 60.0 * rate.sqrt()
    }

    /// Per-sample white accelerometer noise σ in m/s² at `rate` Hz.
    pub fn accel_white_sigma(&self, rate: f64) -> f64 {
        self.accel_vrw / 60.0 * rate.sqrt()
    }

    pub fn gyro_bias_bound(&self) -> f64 {
        self.gyro_bias_instability.to_radians()
    }

    pub fn accel_bias_bound(&self) -> f64 {
        self.accel_bias * 1e-6 * STANDARD_GRAVITY
    }
}

/// Dense true attitude at the IMU rate.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthTrack {
    pub times: Vec<f64>,
    pub attitude: Vec<Euler>,
    /// True `ω^b_ib`, rad/s.
    pub omega_ib_b: Vec<Vector3<f64>>,
}

impl TruthTrack {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordingMeta {
    pub format_version: String,
    pub scenario: ScenarioConfig,
    pub sensor: SensorSpec,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    pub imu: Vec<ImuSample>,
    pub aid: Vec<NavAidSample>,
    pub truth: TruthTrack,
    pub meta: RecordingMeta,
}

impl Recording {
    pub fn name(&self) -> &str {
        &self.meta.scenario.name
    }

    pub fn rate_ratio(&self) -> usize {
        self.meta.scenario.rate_ratio()
    }

    pub fn aid_rate(&self) -> f64 {
        self.meta.scenario.aid_rate as f64
    }

    pub fn duration(&self) -> f64 {
        self.aid.last().map_or(0.0, |a| a.t) - self.aid.first().map_or(0.0, |a| a.t)
    }

    /// Samples for aiding indices `first..=last` and the IMU samples spanning them.
    pub fn window_by_index(&self, first: usize, last: usize) -> Result<(&[ImuSample], &[NavAidSample])> {
        if last <= first || last >= self.aid.len() {
            return Err(Error::InsufficientData(format!(
                "recording '{}' has {} aiding samples; window [{first}, {last}] is out of range",
                self.name(),
                self.aid.len()
            )));
        }
        let r = self.rate_ratio();
        let (k0, k1) = (first * r, last * r);
        if k1 >= self.imu.len() {
            return Err(Error::InsufficientData(format!(
                "recording '{}' IMU stream ends before aiding sample {last}",
                self.name()
            )));
        }
        Ok((&self.imu[k0..=k1], &self.aid[first..=last]))
    }

    /// Window `[start, start + length]` seconds, both ends inclusive.
    pub fn window(&self, start: f64, length: f64) -> Result<(&[ImuSample], &[NavAidSample])> {
        let rate = self.aid_rate();
        let first = (start * rate).round() as usize;
        let steps = (length * rate).round() as usize;
        if steps == 0 {
            return Err(Error::InvalidArgument(format!("window length {length} s is shorter than one aiding step")));
        }
        self.window_by_index(first, first + steps).map_err(|_| {
            Error::InsufficientData(format!(
                "recording '{}' lasts {:.1} s, shorter than the requested window [{start}, {}] s",
                self.name(),
                self.duration(),
                start + length
            ))
        })
    }
}

/// Ground-truth attitude and inertial body rates for a scenario.
pub fn simulate_truth(cfg: &ScenarioConfig) -> Result<TruthTrack> {
    simulate_truth_with(cfg, &NavRateModel::default())
}

pub fn simulate_truth_with(cfg: &ScenarioConfig, model: &NavRateModel) -> Result<TruthTrack> {
    cfg.validate()?;
    let n = cfg.imu_count();
    let w_ie = model.omega_in_n(cfg.lat)?;
    let mut times = Vec::with_capacity(n);
    let mut attitude = Vec::with_capacity(n);
    let mut omega = Vec::with_capacity(n);
    for k in 0..n {
        let t = cfg.imu_time(k);
        let (e, rate) = cfg.attitude_at(t);
        let (sr, cr) = e.roll.sin_cos();
        let (sp, cp) = e.pitch.sin_cos();
        // Z-Y-X Euler rates to body rates relative to the navigation frame
        let w_nb = Vector3::new(
            rate.roll - rate.yaw * sp,
            rate.pitch * cr + rate.yaw * cp * sr,
            -rate.pitch * sr + rate.yaw * cp * cr,
        );
        let c_bn = e.to_dcm().transpose();
        times.push(t);
        attitude.push(e);
        omega.push(w_nb + c_bn * w_ie);
    }
    Ok(TruthTrack {
        times,
        attitude,
        omega_ib_b: omega,
    })
}

/// Independent random streams, one per sensor axis and purpose.
#[derive(Debug, Clone, Copy)]
#[repr(u64)]
enum Stream {
    GyroWhite = 0,
    AccelWhite = 3,
    GyroBias = 6,
    AccelBias = 9,
    GnssHeading = 12,
    GnssLat = 13,
    GnssLon = 14,
}

fn stream(seed: u64, s: Stream, axis: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(s as u64 + axis);
    rng
}

fn gaussian(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return 0.0;
    }
    let z: f64 = rng.sample(StandardNormal);
    sigma * z
}

fn uniform_bias(rng: &mut ChaCha8Rng, bound: f64) -> f64 {
    if bound == 0.0 {
        return 0.0;
    }
    rng.gen_range(-bound..=bound)
}

/// Measurements for a truth track: constant per-run biases plus white noise,
/// GNSS heading labels with Gaussian error.
pub fn synthesize_imu(truth: &TruthTrack, cfg: &ScenarioConfig, spec: &SensorSpec, seed: u64) -> Result<Recording> {
    synthesize_imu_with(truth, cfg, spec, seed, &NavRateModel::default())
}

pub fn synthesize_imu_with(
    truth: &TruthTrack,
    cfg: &ScenarioConfig,
    spec: &SensorSpec,
    seed: u64,
    model: &NavRateModel,
) -> Result<Recording> {
    cfg.validate()?;
    spec.validate()?;
    let rate = cfg.imu_rate as f64;
    let g_n = model.g_n(cfg.lat)?;

    let gyro_bias = Vector3::from_fn(|i, _| uniform_bias(&mut stream(seed, Stream::GyroBias, i as u64), spec.gyro_bias_bound()));
    let accel_bias = Vector3::from_fn(|i, _| uniform_bias(&mut stream(seed, Stream::AccelBias, i as u64), spec.accel_bias_bound()));
    let mut gyro_rng: Vec<_> = (0..3).map(|i| stream(seed, Stream::GyroWhite, i)).collect();
    let mut accel_rng: Vec<_> = (0..3).map(|i| stream(seed, Stream::AccelWhite, i)).collect();
    let (gs, acs) = (spec.gyro_white_sigma(rate), spec.accel_white_sigma(rate));

    let imu = truth
        .times
        .iter()
        .zip(&truth.attitude)
        .zip(&truth.omega_ib_b)
        .map(|((&t, e), w)| {
            let f_true = -(e.to_dcm().transpose() * g_n);
            let gyro_noise = Vector3::from_fn(|i, _| gaussian(&mut gyro_rng[i], gs));
            let accel_noise = Vector3::from_fn(|i, _| gaussian(&mut accel_rng[i], acs));
            ImuSample {
                t,
                omega_ib_b: w + gyro_bias + gyro_noise,
                f_b: f_true + accel_bias + accel_noise,
            }
        })
        .collect();

    let mut heading_rng = stream(seed, Stream::GnssHeading, 0);
    let mut lat_rng = stream(seed, Stream::GnssLat, 0);
    let mut lon_rng = stream(seed, Stream::GnssLon, 0);
    let heading_sigma = spec.gnss_heading_sigma.to_radians();
    let lat_sigma = spec.gnss_pos_sigma / EARTH_RADIUS;
    let lon_sigma = spec.gnss_pos_sigma / (EARTH_RADIUS * cfg.lat.cos().max(1e-6));
    let aid = (0..truth.len())
        .step_by(cfg.rate_ratio())
        .map(|k| NavAidSample {
            t: truth.times[k],
            lat: cfg.lat + gaussian(&mut lat_rng, lat_sigma),
            lon: cfg.lon + gaussian(&mut lon_rng, lon_sigma),
            heading_gt: Angle::new(truth.attitude[k].yaw + gaussian(&mut heading_rng, heading_sigma)),
        })
        .collect();

    Ok(Recording {
        imu,
        aid,
        truth: truth.clone(),
        meta: RecordingMeta {
            format_version: FORMAT_VERSION.into(),
            scenario: cfg.clone(),
            sensor: *spec,
            seed,
        },
    })
}

/// Truth plus measurements in one call, using the scenario's own seed.
pub fn simulate(cfg: &ScenarioConfig, spec: &SensorSpec) -> Result<Recording> {
    let truth = simulate_truth(cfg)?;
    synthesize_imu(&truth, cfg, spec, cfg.seed)
}

/// Latitude of the default scenarios (a harbour pier).
pub fn default_latitude() -> f64 {
    32.5f64.to_radians()
}

/// Five moored-vessel scenarios S1–S5. S5 has the largest heading sway and is
/// meant for training only. Each lasts 430 s: `[10, 130)` s is the evaluation
/// segment and `[130, 430]` s the training segment.
pub fn default_bank(base_seed: u64) -> Vec<ScenarioConfig> {
    let osc = Oscillation::new;
    let specs: [(&str, f64, [Oscillation; 3], [Oscillation; 2], [Oscillation; 2]); 5] = [
        (
            "S1",
            110.0,
            [osc(2.0, 60.0, 0.3), osc(0.8, 33.0, 1.1), osc(0.3, 21.0, 2.0)],
            [osc(1.5, 6.5, 0.0), osc(0.4, 3.1, 0.7)],
            [osc(0.8, 5.2, 0.4), osc(0.2, 2.7, 1.9)],
        ),
        (
            "S2",
            -35.0,
            [osc(1.2, 95.0, 1.7), osc(0.6, 31.0, 0.2), osc(0.2, 20.0, 2.8)],
            [osc(1.0, 7.3, 0.5), osc(0.3, 3.6, 2.2)],
            [osc(0.6, 5.9, 1.3), osc(0.2, 2.9, 0.1)],
        ),
        (
            "S3",
            -160.0,
            [osc(3.0, 75.0, 0.9), osc(1.0, 27.0, 2.4), osc(0.4, 20.5, 0.6)],
            [osc(2.0, 6.1, 1.0), osc(0.5, 3.3, 0.4)],
            [osc(1.0, 4.8, 2.6), osc(0.3, 2.5, 1.2)],
        ),
        (
            "S4",
            65.0,
            [osc(1.5, 110.0, 2.2), osc(0.7, 41.0, 0.8), osc(0.2, 24.0, 1.5)],
            [osc(1.2, 8.0, 2.9), osc(0.3, 4.1, 0.3)],
            [osc(0.7, 6.4, 0.2), osc(0.2, 3.2, 2.0)],
        ),
        (
            "S5",
            -60.0,
            [osc(5.0, 45.0, 0.1), osc(2.0, 29.0, 1.4), osc(1.0, 20.0, 2.5)],
            [osc(2.5, 5.6, 0.8), osc(0.6, 2.8, 1.6)],
            [osc(1.4, 4.5, 0.5), osc(0.4, 2.3, 2.7)],
        ),
    ];
    specs
        .iter()
        .enumerate()
        .map(|(i, (name, psi0, heading, roll, pitch))| ScenarioConfig {
            name: (*name).into(),
            duration: 430.0,
            lat: default_latitude(),
            lon: 34.95f64.to_radians(),
            psi0: Angle::from_degrees(*psi0),
            heading_osc: heading.to_vec(),
            roll_osc: roll.to_vec(),
            pitch_osc: pitch.to_vec(),
            imu_rate: 100,
            aid_rate: 5,
            seed: base_seed.wrapping_add(i as u64),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attitude::{dcm_to_rotvec, rotvec_to_dcm, RotVec};
    use crate::strapdown::{gravity_magnitude, EARTH_RATE};

    fn short(name: &str) -> ScenarioConfig {
        let mut cfg = ScenarioConfig::still(name, 20.0, 0.6, Angle::from_degrees(40.0), 3);
        cfg.heading_osc = vec![Oscillation::new(2.0, 40.0, 0.0)];
        cfg.roll_osc = vec![Oscillation::new(1.5, 6.0, 0.4)];
        cfg.pitch_osc = vec![Oscillation::new(0.8, 5.0, 1.2)];
        cfg
    }

    #[test]
    fn still_vessel_sees_only_earth_rate() {
        let cfg = ScenarioConfig::still("still", 2.0, 0.6, Angle::from_degrees(25.0), 1);
        let truth = simulate_truth(&cfg).unwrap();
        let c_bn = Euler::new(25f64.to_radians(), 0.0, 0.0).to_dcm().transpose();
        let expected = c_bn * Vector3::new(EARTH_RATE * 0.6f64.cos(), 0.0, -EARTH_RATE * 0.6f64.sin());
        for w in &truth.omega_ib_b {
            assert!((w - expected).norm() < 1e-18);
        }
        assert!(truth.attitude.iter().all(|e| *e == truth.attitude[0]));
    }

    #[test]
    fn heading_oscillation_definition() {
        let mut cfg = ScenarioConfig::still("h", 80.0, 0.6, Angle::from_degrees(10.0), 1);
        cfg.heading_osc = vec![Oscillation::new(2.0, 40.0, 0.0)];
        let truth = simulate_truth(&cfg).unwrap();
        for (t, e) in truth.times.iter().zip(&truth.attitude) {
            let expected = 10f64.to_radians() + 2f64.to_radians() * (TAU * t / 40.0).sin();
            assert!((e.yaw - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn body_rates_match_finite_differences() {
        let cfg = short("fd");
        let truth = simulate_truth(&cfg).unwrap();
        let w_ie = Vector3::new(EARTH_RATE * cfg.lat.cos(), 0.0, -EARTH_RATE * cfg.lat.sin());
        // inertial-to-body via the rotating navigation frame
        let c_ib = |k: usize| {
            let t = truth.times[k];
            rotvec_to_dcm(&RotVec(w_ie * t)).unwrap() * truth.attitude[k].to_dcm()
        };
        let h = truth.times[1] - truth.times[0];
        for k in (1..truth.len() - 1).step_by(37) {
            let delta = c_ib(k - 1).transpose() * c_ib(k + 1);
            let fd = dcm_to_rotvec(&delta).0 / (2.0 * h);
            assert!((fd - truth.omega_ib_b[k]).norm() < 1e-6, "k = {k}");
        }
    }

    #[test]
    fn noise_free_specific_force_is_gravity() {
        let cfg = ScenarioConfig::still("level", 5.0, 0.6, Angle::from_degrees(70.0), 1);
        let rec = simulate(&cfg, &SensorSpec::noise_free()).unwrap();
        let g = gravity_magnitude(0.6);
        for s in &rec.imu {
            assert!((s.f_b.norm() - g).abs() < 1e-12);
            assert!((s.f_b - Vector3::new(0.0, 0.0, -g)).norm() < 1e-12);
        }
        let moving = simulate(&short("moving"), &SensorSpec::noise_free()).unwrap();
        let g_n = Vector3::new(0.0, 0.0, gravity_magnitude(0.6));
        for (s, e) in moving.imu.iter().zip(&moving.truth.attitude) {
            assert_eq!(s.f_b, -(e.to_dcm().transpose() * g_n));
        }
    }

    #[test]
    fn aid_is_every_twentieth_imu_sample() {
        let rec = simulate(&short("a"), &SensorSpec::table3()).unwrap();
        assert_eq!(rec.imu.len(), 2001);
        assert_eq!(rec.aid.len(), 101);
        for (j, a) in rec.aid.iter().enumerate() {
            assert_eq!(a.t, rec.imu[20 * j].t);
        }
    }

    #[test]
    fn labels_match_truth_without_gnss_noise() {
        let mut spec = SensorSpec::table3();
        spec.gnss_heading_sigma = 0.0;
        let rec = simulate(&short("l"), &spec).unwrap();
        for (j, a) in rec.aid.iter().enumerate() {
            assert_eq!(a.heading_gt, Angle::new(rec.truth.attitude[20 * j].yaw));
        }
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let a = simulate(&short("d"), &SensorSpec::table3()).unwrap();
        let b = simulate(&short("d"), &SensorSpec::table3()).unwrap();
        assert_eq!(a, b);
        let mut other = short("d");
        other.seed = 4;
        assert_ne!(simulate(&other, &SensorSpec::table3()).unwrap().imu, a.imu);
    }

    #[test]
    fn gyro_white_sigma_unit_conversion() {
        let s = SensorSpec::table3().gyro_white_sigma(100.0).to_degrees();
        assert!((s - 0.032 / 60.0 * 10.0).abs() < 1e-15);
        assert!((s - 5.33e-3).abs() < 1e-5);
    }

    #[test]
    fn config_validation() {
        let mut cfg = short("v");
        cfg.aid_rate = 3;
        assert!(cfg.validate().is_err());
        let mut cfg = short("v");
        cfg.duration = 0.0;
        assert!(cfg.validate().is_err());
        let mut spec = SensorSpec::table3();
        spec.gyro_arw = -1.0;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn default_bank_shape() {
        let bank = default_bank(100);
        assert_eq!(bank.len(), 5);
        let names: Vec<_> = bank.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, ["S1", "S2", "S3", "S4", "S5"]);
        for c in &bank {
            c.validate().unwrap();
            for o in &c.heading_osc {
                assert!((20.0..=120.0).contains(&o.period_s));
            }
        }
    }

    #[test]
    fn window_bounds() {
        let rec = simulate(&short("w"), &SensorSpec::noise_free()).unwrap();
        let (imu, aid) = rec.window(2.0, 10.0).unwrap();
        assert_eq!(aid.len(), 51);
        assert_eq!(imu.len(), 1001);
        assert_eq!(imu[0].t, aid[0].t);
        assert_eq!(imu.last().unwrap().t, aid.last().unwrap().t);
        assert!(matches!(rec.window(15.0, 10.0), Err(Error::InsufficientData(_))));
    }
}
