//! Navigation reference models, frame-tracking integration and observation vectors.
//!
//! The attitude at time `t` is factored as `C^n_b(t) = C^n_{n0}(t) C^{n0}_{b0} C^{b0}_b(t)`.
//! The two outer factors are tracked here by integrating the gyro rate and the
//! navigation-frame rate; the constant middle factor is what the aligners solve
//! for, from pairs of observation vectors `u^{b0}(t) = C^{b0}_{n0} u^{n0}(t)`.
//!
//! The navigation frame rate uses the quasi-stationary closure
//! `ω^n_in = ω^n_ie(lat)`: a moored vessel has no appreciable transport rate.

use nalgebra::Vector3;

use crate::attitude::{rodrigues, Angle, Dcm};
use crate::error::{Error, Result};

/// Earth rotation rate, rad/s (WGS-84).
pub const EARTH_RATE: f64 = 7.292115e-5;

// Somigliana normal gravity, WGS-84.
const GRAVITY_EQUATOR: f64 = 9.7803253359;
const SOMIGLIANA_K: f64 = 0.00193185265241;
const ECCENTRICITY_SQ: f64 = 0.00669437999013;

/// Frame-tracking DCMs are re-projected onto SO(3) at this step interval.
pub const RENORMALIZE_EVERY: usize = 1000;

/// Largest tolerated gap between an aiding timestamp and the body sample paired with it.
pub const MAX_PAIRING_SKEW: f64 = 0.010;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImuSample {
    /// Seconds since recording start.
    pub t: f64,
    /// Gyro rate `ω^b_ib`, rad/s.
    pub omega_ib_b: Vector3<f64>,
    /// Specific force `f^b`, m/s².
    pub f_b: Vector3<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NavAidSample {
    pub t: f64,
    /// Geodetic latitude, rad.
    pub lat: f64,
    /// Longitude, rad.
    pub lon: f64,
    /// Reference heading used as the label.
    pub heading_gt: Angle,
}

fn check_latitude(lat: f64) -> Result<()> {
    if !lat.is_finite() || lat.abs() > std::f64::consts::FRAC_PI_2 {
        return Err(Error::InvalidArgument(format!(
            "latitude {lat} rad outside [-pi/2, pi/2]"
        )));
    }
    Ok(())
}

/// Earth rate resolved in NED: `[Ω cos lat, 0, −Ω sin lat]`.
pub fn earth_rate_nav(lat: f64) -> Result<Vector3<f64>> {
    NavRateModel::default().omega_in_n(lat)
}

/// Normal gravity in NED (Down positive).
pub fn gravity_nav(lat: f64) -> Result<Vector3<f64>> {
    NavRateModel::default().g_n(lat)
}

/// Somigliana normal gravity magnitude.
pub fn gravity_magnitude(lat: f64) -> f64 {
    let s2 = lat.sin().powi(2);
    GRAVITY_EQUATOR * (1.0 + SOMIGLIANA_K * s2) / (1.0 - ECCENTRICITY_SQ * s2).sqrt()
}

/// Reference model for `ω^n_in` and `g^n` as functions of latitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NavRateModel {
    pub earth_rate: f64,
}

impl Default for NavRateModel {
    fn default() -> Self {
        NavRateModel {
            earth_rate: EARTH_RATE,
        }
    }
}

impl NavRateModel {
    /// A model with a custom (possibly zero) Earth rate; intended for tests.
    pub fn with_earth_rate(earth_rate: f64) -> Self {
        NavRateModel { earth_rate }
    }

    pub fn omega_in_n(&self, lat: f64) -> Result<Vector3<f64>> {
        check_latitude(lat)?;
        let (s, c) = lat.sin_cos();
        Ok(Vector3::new(self.earth_rate * c, 0.0, -self.earth_rate * s))
    }

    pub fn g_n(&self, lat: f64) -> Result<Vector3<f64>> {
        check_latitude(lat)?;
        Ok(Vector3::new(0.0, 0.0, gravity_magnitude(lat)))
    }
}

fn check_increasing<T>(samples: &[T], time: impl Fn(&T) -> f64, what: &str) -> Result<()> {
    for (k, w) in samples.windows(2).enumerate() {
        let (a, b) = (time(&w[0]), time(&w[1]));
        if !(b > a) {
            return Err(Error::InvalidArgument(format!(
                "{what} timestamps not strictly increasing at index {} ({a} -> {b})",
                k + 1
            )));
        }
    }
    Ok(())
}

/// Chains rotation increments into `C^{t0}_{t_k}`, re-projecting periodically.
fn chain(increments: impl Iterator<Item = Vector3<f64>>, len: usize) -> Vec<Dcm> {
    let mut out = Vec::with_capacity(len);
    let mut c = Dcm::identity();
    out.push(c);
    for (k, dphi) in increments.enumerate() {
        c = Dcm::from_matrix_unchecked(c.matrix() * rodrigues(&dphi));
        if (k + 1) % RENORMALIZE_EVERY == 0 {
            c = c.orthonormalized();
        }
        out.push(c);
    }
    out
}

/// Body-frame track `C^{b0}_b(t_k)` from gyro samples.
///
/// Each step uses the trapezoidal angle increment `α_k = (ω_k + ω_{k+1}) Δt / 2`
/// plus the two-sample coning term `(α_{k−1} × α_k) / 12`.
pub fn integrate_body_frame(samples: &[ImuSample]) -> Result<Vec<Dcm>> {
    if samples.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "body-frame integration needs at least 2 IMU samples, got {}",
            samples.len()
        )));
    }
    check_increasing(samples, |s| s.t, "IMU")?;
    let mut prev: Option<Vector3<f64>> = None;
    let increments = samples.windows(2).map(move |w| {
        let dt = w[1].t - w[0].t;
        let alpha = (w[0].omega_ib_b + w[1].omega_ib_b) * (0.5 * dt);
        let coning = prev.map_or_else(Vector3::zeros, |p: Vector3<f64>| p.cross(&alpha) / 12.0);
        prev = Some(alpha);
        alpha + coning
    });
    Ok(chain(increments, samples.len()))
}

/// Navigation-frame track `C^{n0}_n(t_j)` at the aiding rate. No coning term:
/// the frame rate direction changes only with latitude.
pub fn integrate_nav_frame(aid: &[NavAidSample], model: &NavRateModel) -> Result<Vec<Dcm>> {
    if aid.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "navigation-frame integration needs at least 2 aiding samples, got {}",
            aid.len()
        )));
    }
    check_increasing(aid, |s| s.t, "aiding")?;
    let rates = aid
        .iter()
        .map(|s| model.omega_in_n(s.lat))
        .collect::<Result<Vec<_>>>()?;
    let increments = aid
        .windows(2)
        .zip(rates.windows(2))
        .map(|(s, w)| (w[0] + w[1]) * (0.5 * (s[1].t - s[0].t)));
    Ok(chain(increments, aid.len()))
}

/// Both frame tracks over one alignment window plus the body sample index
/// paired with each aiding sample.
#[derive(Debug, Clone)]
pub struct FrameTracks {
    /// `C^{b0}_b` at every IMU sample.
    pub body: Vec<Dcm>,
    /// `C^{n0}_n` at every aiding sample.
    pub nav: Vec<Dcm>,
    /// For each aiding sample, the nearest preceding IMU sample.
    pub pairing: Vec<usize>,
}

impl FrameTracks {
    pub fn build(imu: &[ImuSample], aid: &[NavAidSample], model: &NavRateModel) -> Result<Self> {
        let body = integrate_body_frame(imu)?;
        let nav = integrate_nav_frame(aid, model)?;
        let pairing = pair_to_body(imu, aid)?;
        Ok(FrameTracks { body, nav, pairing })
    }

    /// `C^n_{n0}(t_j) C^{n0}_{b0} C^{b0}_b(t_j)` for aiding index `j`.
    pub fn recompose(&self, nav0_body0: &Dcm, j: usize) -> Dcm {
        self.nav[j].transpose() * *nav0_body0 * self.body[self.pairing[j]]
    }
}

/// Index of the nearest preceding IMU sample for every aiding timestamp.
pub fn pair_to_body(imu: &[ImuSample], aid: &[NavAidSample]) -> Result<Vec<usize>> {
    let (Some(first_imu), Some(last_imu)) = (imu.first(), imu.last()) else {
        return Err(Error::InsufficientData("empty IMU window".into()));
    };
    let (Some(first_aid), Some(last_aid)) = (aid.first(), aid.last()) else {
        return Err(Error::InsufficientData("empty aiding window".into()));
    };
    if (first_imu.t - first_aid.t).abs() > MAX_PAIRING_SKEW
        || last_aid.t - last_imu.t > MAX_PAIRING_SKEW
        || last_imu.t - last_aid.t > MAX_PAIRING_SKEW
    {
        return Err(Error::AlignmentWindow(format!(
            "IMU covers [{}, {}] s but aiding covers [{}, {}] s",
            first_imu.t, last_imu.t, first_aid.t, last_aid.t
        )));
    }
    // Small tolerance so that equal timestamps written with round-off still pair.
    const EPS: f64 = 1e-9;
    let mut out = Vec::with_capacity(aid.len());
    let mut k = 0;
    for a in aid {
        while k + 1 < imu.len() && imu[k + 1].t <= a.t + EPS {
            k += 1;
        }
        let skew = (a.t - imu[k].t).abs();
        if skew > MAX_PAIRING_SKEW {
            return Err(Error::AlignmentWindow(format!(
                "aiding sample at {} s has no IMU sample within {} s",
                a.t, MAX_PAIRING_SKEW
            )));
        }
        out.push(k);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObservationForm {
    /// Time-integrated vectors, m/s.
    Integrated,
    /// Pointwise mapped vectors, m/s².
    Instantaneous,
}

/// Paired observation vectors at the aiding timestamps of one window.
#[derive(Debug, Clone)]
pub struct ObservationSeries {
    pub times: Vec<f64>,
    pub u_b0: Vec<Vector3<f64>>,
    pub u_n0: Vec<Vector3<f64>>,
    pub form: ObservationForm,
}

impl ObservationSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

fn check_tracks(imu: &[ImuSample], aid: &[NavAidSample], tracks: &FrameTracks) -> Result<()> {
    if tracks.body.len() != imu.len() || tracks.nav.len() != aid.len() || tracks.pairing.len() != aid.len() {
        return Err(Error::AlignmentWindow(format!(
            "frame tracks ({} body, {} nav) do not match the window ({} IMU, {} aiding samples)",
            tracks.body.len(),
            tracks.nav.len(),
            imu.len(),
            aid.len()
        )));
    }
    pair_to_body(imu, aid).map(|_| ())
}

/// Integrated observation vectors:
/// `u^{b0}(t) = −∫ C^{b0}_b f^b dτ` (trapezoid at the IMU rate) and
/// `u^{n0}(t) = ∫ C^{n0}_n g^n dτ` (trapezoid at the aiding rate), with `g^n`
/// held at its value for the window's first aiding sample.
pub fn observation_integrated(
    imu: &[ImuSample],
    aid: &[NavAidSample],
    model: &NavRateModel,
    tracks: &FrameTracks,
) -> Result<ObservationSeries> {
    check_tracks(imu, aid, tracks)?;
    let g = model.g_n(aid[0].lat)?;

    let mut body_integral = Vec::with_capacity(imu.len());
    let mut acc = Vector3::zeros();
    let mut prev = tracks.body[0] * imu[0].f_b;
    body_integral.push(acc);
    for k in 1..imu.len() {
        let cur = tracks.body[k] * imu[k].f_b;
        acc += (prev + cur) * (0.5 * (imu[k].t - imu[k - 1].t));
        body_integral.push(acc);
        prev = cur;
    }

    let mut u_n0 = Vec::with_capacity(aid.len());
    let mut acc = Vector3::zeros();
    let mut prev = tracks.nav[0] * g;
    u_n0.push(acc);
    for j in 1..aid.len() {
        let cur = tracks.nav[j] * g;
        acc += (prev + cur) * (0.5 * (aid[j].t - aid[j - 1].t));
        u_n0.push(acc);
        prev = cur;
    }

    let u_b0 = tracks.pairing.iter().map(|&k| -body_integral[k]).collect();
    Ok(ObservationSeries {
        times: aid.iter().map(|a| a.t).collect(),
        u_b0,
        u_n0,
        form: ObservationForm::Integrated,
    })
}

/// Instantaneous observation vectors `u^{b0} = −C^{b0}_b f^b`, `u^{n0} = C^{n0}_n g^n`.
pub fn observation_instantaneous(
    imu: &[ImuSample],
    aid: &[NavAidSample],
    model: &NavRateModel,
    tracks: &FrameTracks,
) -> Result<ObservationSeries> {
    check_tracks(imu, aid, tracks)?;
    let g = model.g_n(aid[0].lat)?;
    let u_b0 = tracks
        .pairing
        .iter()
        .map(|&k| -(tracks.body[k] * imu[k].f_b))
        .collect();
    let u_n0 = tracks.nav.iter().map(|c| *c * g).collect();
    Ok(ObservationSeries {
        times: aid.iter().map(|a| a.t).collect(),
        u_b0,
        u_n0,
        form: ObservationForm::Instantaneous,
    })
}

pub fn observations(
    form: ObservationForm,
    imu: &[ImuSample],
    aid: &[NavAidSample],
    model: &NavRateModel,
    tracks: &FrameTracks,
) -> Result<ObservationSeries> {
    match form {
        ObservationForm::Integrated => observation_integrated(imu, aid, model, tracks),
        ObservationForm::Instantaneous => observation_instantaneous(imu, aid, model, tracks),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attitude::{dcm_to_rotvec, rot_z};
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn imu_series(n: usize, dt: f64, rate: impl Fn(f64) -> Vector3<f64>, f: Vector3<f64>) -> Vec<ImuSample> {
        (0..n)
            .map(|k| {
                let t = k as f64 * dt;
                ImuSample {
                    t,
                    omega_ib_b: rate(t),
                    f_b: f,
                }
            })
            .collect()
    }

    fn aid_series(n: usize, dt: f64, lat: f64) -> Vec<NavAidSample> {
        (0..n)
            .map(|k| NavAidSample {
                t: k as f64 * dt,
                lat,
                lon: 0.6,
                heading_gt: Angle::new(0.0),
            })
            .collect()
    }

    #[test]
    fn earth_rate_cases() {
        assert_eq!(earth_rate_nav(0.0).unwrap(), Vector3::new(EARTH_RATE, 0.0, 0.0));
        let pole = earth_rate_nav(FRAC_PI_2).unwrap();
        assert!(pole.x.abs() < 1e-20);
        assert_eq!(pole.z, -EARTH_RATE);
        assert_relative_eq!(earth_rate_nav(PI / 4.0).unwrap().norm(), EARTH_RATE, epsilon = 1e-18);
        assert!(matches!(earth_rate_nav(2.0), Err(Error::InvalidArgument(_))));
        assert!(gravity_nav(-1.6).is_err());
    }

    #[test]
    fn somigliana_gravity() {
        assert_eq!(gravity_nav(0.0).unwrap(), Vector3::new(0.0, 0.0, 9.7803253359));
        assert!((gravity_nav(FRAC_PI_2).unwrap().z - 9.8321849379).abs() < 1e-9);
        assert!((gravity_nav(PI / 4.0).unwrap().z - 9.8062).abs() < 1e-4);
    }

    #[test]
    fn body_integration_needs_two_samples() {
        let one = imu_series(1, 0.01, |_| Vector3::zeros(), Vector3::zeros());
        assert!(matches!(integrate_body_frame(&one), Err(Error::InsufficientData(_))));
        let mut two = imu_series(2, 0.01, |_| Vector3::zeros(), Vector3::zeros());
        two[1].t = 0.0;
        assert!(matches!(integrate_body_frame(&two), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn zero_rate_gives_identity() {
        let s = imu_series(500, 0.01, |_| Vector3::zeros(), Vector3::zeros());
        assert!(integrate_body_frame(&s).unwrap().iter().all(|c| *c == Dcm::identity()));
    }

    #[test]
    fn constant_rate_matches_closed_form() {
        let wz = 0.05;
        let n = 12001;
        let s = imu_series(n, 0.01, |_| Vector3::new(0.0, 0.0, wz), Vector3::zeros());
        let track = integrate_body_frame(&s).unwrap();
        let t_end = s[n - 1].t;
        let expected = rot_z(wz * t_end);
        assert!((track[n - 1].matrix() - expected.matrix()).abs().max() < 1e-10);
        // orthonormality over the full run
        assert!(track.iter().all(|c| c.orthonormality_error() < 1e-9));
    }

    #[test]
    fn orthonormality_drift_is_bounded() {
        let s = imu_series(
            12001,
            0.01,
            |t| Vector3::new(0.3 * (0.7 * t).sin(), 0.2 * (1.3 * t).cos(), 0.1),
            Vector3::zeros(),
        );
        let track = integrate_body_frame(&s).unwrap();
        let worst = track.iter().map(|c| c.orthonormality_error()).fold(0.0, f64::max);
        assert!(worst < 1e-9, "drift {worst:e}");
    }

    #[test]
    fn coning_drift_matches_analytic_rate() {
        // ω = [aΩ cos Ωt, aΩ sin Ωt, 0] drifts about z at a²Ω/2 for small a.
        let a = 0.02;
        let omega_c = 2.0 * PI * 0.5;
        let periods = 20.0;
        let dt = 0.01;
        let n = (periods * 2.0 / dt) as usize + 1;
        let s = imu_series(
            n,
            dt,
            |t| Vector3::new(a * omega_c * (omega_c * t).cos(), a * omega_c * (omega_c * t).sin(), 0.0),
            Vector3::zeros(),
        );
        let track = integrate_body_frame(&s).unwrap();
        let t_end = s[n - 1].t;
        let phi = dcm_to_rotvec(&track[n - 1]);
        let measured = phi.0.z / t_end;
        let analytic = a * a * omega_c / 2.0;
        assert!(
            (measured.abs() - analytic).abs() / analytic < 0.05,
            "measured {measured:e}, analytic {analytic:e}"
        );
    }

    #[test]
    fn nav_frame_rotates_by_earth_rate() {
        let lat = 32.5f64.to_radians();
        let aid = aid_series(601, 0.2, lat);
        let track = integrate_nav_frame(&aid, &NavRateModel::default()).unwrap();
        let angle = dcm_to_rotvec(track.last().unwrap()).angle();
        assert!((angle - EARTH_RATE * 120.0).abs() < 1e-12);
        assert!((angle - 8.75e-3).abs() < 1e-5);

        let flat = integrate_nav_frame(&aid, &NavRateModel::with_earth_rate(0.0)).unwrap();
        assert!(flat.iter().all(|c| *c == Dcm::identity()));
        assert!(matches!(
            integrate_nav_frame(&aid[..1], &NavRateModel::default()),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn nav_transpose_is_inverse() {
        let aid = aid_series(101, 0.2, 0.4);
        let track = integrate_nav_frame(&aid, &NavRateModel::default()).unwrap();
        for c in &track {
            let prod = c.transpose() * *c;
            assert!((prod.matrix() - Dcm::identity().matrix()).abs().max() < 1e-12);
        }
    }

    #[test]
    fn zero_specific_force_gives_zero_body_observation() {
        let imu = imu_series(201, 0.01, |t| Vector3::new(0.01 * t, 0.0, 0.02), Vector3::zeros());
        let aid = aid_series(11, 0.2, 0.5);
        let model = NavRateModel::default();
        let tracks = FrameTracks::build(&imu, &aid, &model).unwrap();
        let obs = observation_integrated(&imu, &aid, &model, &tracks).unwrap();
        assert!(obs.u_b0.iter().all(|u| *u == Vector3::zeros()));
        assert_eq!(obs.u_n0[0], Vector3::zeros());
        let g = gravity_magnitude(0.5);
        let t = obs.times[10];
        assert!((obs.u_n0[10].norm() - g * t).abs() / (g * t) < 1e-6);
    }

    #[test]
    fn instantaneous_at_start_is_raw_sample() {
        let f = Vector3::new(0.1, -0.2, -9.79);
        let imu = imu_series(201, 0.01, |_| Vector3::new(0.01, 0.02, 0.03), f);
        let aid = aid_series(11, 0.2, 0.5);
        let model = NavRateModel::default();
        let tracks = FrameTracks::build(&imu, &aid, &model).unwrap();
        let obs = observation_instantaneous(&imu, &aid, &model, &tracks).unwrap();
        assert_eq!(obs.u_b0[0], -f);
        assert_eq!(obs.u_n0[0], model.g_n(0.5).unwrap());
        assert_eq!(obs.form, ObservationForm::Instantaneous);

        // identity body track reduces to −f^b pointwise
        let mut forced = tracks.clone();
        forced.body.iter_mut().for_each(|c| *c = Dcm::identity());
        let obs = observation_instantaneous(&imu, &aid, &model, &forced).unwrap();
        assert!(obs.u_b0.iter().all(|u| *u == -f));
    }

    #[test]
    fn mismatched_ranges_are_rejected() {
        let imu = imu_series(101, 0.01, |_| Vector3::zeros(), Vector3::zeros());
        let aid = aid_series(11, 0.2, 0.5);
        let model = NavRateModel::default();
        assert!(matches!(
            FrameTracks::build(&imu, &aid, &model),
            Err(Error::AlignmentWindow(_))
        ));
        let imu_long = imu_series(201, 0.01, |_| Vector3::zeros(), Vector3::zeros());
        let tracks = FrameTracks::build(&imu_long, &aid, &model).unwrap();
        assert!(matches!(
            observation_integrated(&imu, &aid, &model, &tracks),
            Err(Error::AlignmentWindow(_))
        ));
    }

    #[test]
    fn pairing_picks_preceding_sample() {
        let imu = imu_series(201, 0.01, |_| Vector3::zeros(), Vector3::zeros());
        let aid = aid_series(11, 0.2, 0.5);
        let p = pair_to_body(&imu, &aid).unwrap();
        assert_eq!(p, (0..11).map(|j| j * 20).collect::<Vec<_>>());
    }
}
