//! Coarse heading aligners.
//!
//! Both solvers estimate the constant `C^{n0}_{b0}` from observation pairs
//! `u^{b0}(t) = C^{b0}_{n0} u^{n0}(t)`:
//!
//! - DVA: closed form from two pairs (stacked triads, one 3×3 inverse).
//! - OBA: Wahba-type least squares in quaternion space; the optimal
//!   quaternion is the eigenvector of the smallest eigenvalue of `K`.
//!
//! Each comes in an integrated (`I-`) and an instantaneous (`A-`) flavour
//! depending on which observation form feeds it.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix3, Matrix4, Vector3};
use serde::{Deserialize, Serialize};

use crate::attitude::{angle_diff, dcm_to_heading, quat_to_dcm, skew, Angle, Dcm, Quaternion};
use crate::error::{Error, Result};
use crate::jacobi::symmetric_eigen;
use crate::sim::Recording;
use crate::strapdown::{observations, FrameTracks, ImuSample, NavAidSample, NavRateModel, ObservationForm};

/// Minimum angle between the two observations of a DVA pair, rad.
pub const DVA_MIN_SEPARATION: f64 = 1e-5;
/// Eigenvalue gap below which the OBA solution is considered unobservable.
pub const OBA_EIGEN_GAP: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AlignMethod {
    #[serde(rename = "I-DVA")]
    IDva,
    #[serde(rename = "A-DVA")]
    ADva,
    #[serde(rename = "I-OBA")]
    IOba,
    #[serde(rename = "A-OBA")]
    AOba,
}

impl AlignMethod {
    pub const ALL: [AlignMethod; 4] = [AlignMethod::IDva, AlignMethod::ADva, AlignMethod::IOba, AlignMethod::AOba];

    pub fn form(self) -> ObservationForm {
        match self {
            AlignMethod::IDva | AlignMethod::IOba => ObservationForm::Integrated,
            AlignMethod::ADva | AlignMethod::AOba => ObservationForm::Instantaneous,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AlignMethod::IDva => "I-DVA",
            AlignMethod::ADva => "A-DVA",
            AlignMethod::IOba => "I-OBA",
            AlignMethod::AOba => "A-OBA",
        }
    }

    fn is_dva(self) -> bool {
        matches!(self, AlignMethod::IDva | AlignMethod::ADva)
    }
}

impl fmt::Display for AlignMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AlignMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace('_', "-").as_str() {
            "I-DVA" | "IDVA" => Ok(AlignMethod::IDva),
            "A-DVA" | "ADVA" => Ok(AlignMethod::ADva),
            "I-OBA" | "IOBA" => Ok(AlignMethod::IOba),
            "A-OBA" | "AOBA" => Ok(AlignMethod::AOba),
            _ => Err(Error::InvalidArgument(format!("unknown alignment method '{s}'"))),
        }
    }
}

fn unit(v: &Vector3<f64>, what: &str) -> Result<Vector3<f64>> {
    let n = v.norm();
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::InvalidArgument(format!("{what} observation vector is zero or non-finite")));
    }
    Ok(v / n)
}

fn triad(u1: &Vector3<f64>, u2: &Vector3<f64>) -> Matrix3<f64> {
    let c = u1.cross(u2);
    Matrix3::from_rows(&[u1.transpose(), u2.transpose(), c.transpose()])
}

/// Dual-vector solution `C^{n0}_{b0} = [n-triad]⁻¹ [b-triad]`, projected onto SO(3).
pub fn dva_solve(
    u1_n0: &Vector3<f64>,
    u2_n0: &Vector3<f64>,
    u1_b0: &Vector3<f64>,
    u2_b0: &Vector3<f64>,
) -> Result<Dcm> {
    let min_sin = DVA_MIN_SEPARATION.sin();
    let n1 = unit(u1_n0, "first n0")?;
    let n2 = unit(u2_n0, "second n0")?;
    let b1 = unit(u1_b0, "first b0")?;
    let b2 = unit(u2_b0, "second b0")?;
    for (pair, a, b) in [("n0", &n1, &n2), ("b0", &b1, &b2)] {
        let sep = a.cross(b).norm();
        if sep <= min_sin {
            return Err(Error::DegenerateGeometry {
                pair,
                detail: format!("|u1 x u2| = {sep:.3e}"),
            });
        }
    }
    let n_inv = triad(&n1, &n2).try_inverse().ok_or_else(|| Error::DegenerateGeometry {
        pair: "n0",
        detail: "stacked triad is singular".into(),
    })?;
    let raw = n_inv * triad(&b1, &b2);
    Dcm::nearest(&raw).map_err(|e| Error::DegenerateGeometry {
        pair: "b0",
        detail: e.to_string(),
    })
}

/// `[0 −uᵀ; u [u×]]`: left multiplication by the pure quaternion `u`.
pub fn h_plus(u: &Vector3<f64>) -> Matrix4<f64> {
    quat_mult_matrix(u, &skew(u))
}

/// `[0 −uᵀ; u −[u×]]`: right multiplication by the pure quaternion `u`.
pub fn h_minus(u: &Vector3<f64>) -> Matrix4<f64> {
    quat_mult_matrix(u, &(-skew(u)))
}

fn quat_mult_matrix(u: &Vector3<f64>, block: &Matrix3<f64>) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    for i in 0..3 {
        m[(0, i + 1)] = -u[i];
        m[(i + 1, 0)] = u[i];
        for j in 0..3 {
            m[(i + 1, j + 1)] = block[(i, j)];
        }
    }
    m
}

/// Running sum of the Wahba quadratic form over unit-normalized pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WahbaAccumulator {
    pub k: Matrix4<f64>,
    pub count: usize,
    /// Pairs dropped because one of the vectors was zero.
    pub skipped: usize,
}

impl WahbaAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn accumulate(&mut self, u_n0: &Vector3<f64>, u_b0: &Vector3<f64>) {
        let (nn, nb) = (u_n0.norm(), u_b0.norm());
        if !(nn > 0.0 && nb > 0.0 && nn.is_finite() && nb.is_finite()) {
            self.skipped += 1;
            return;
        }
        let d = h_plus(&(u_n0 / nn)) - h_minus(&(u_b0 / nb));
        self.k += d.transpose() * d;
        self.count += 1;
    }

    /// Optimal quaternion and `C^{n0}_{b0} = C(q)`.
    ///
    /// The cost vanishes when `u^{n0} ⊗ q = q ⊗ u^{b0}`, i.e. when `q` rotates
    /// `b0` vectors into `n0`, so `C(q)` is `C^{n0}_{b0}` directly.
    pub fn solve(&self) -> Result<(Quaternion, Dcm)> {
        if self.count < 2 {
            return Err(Error::InsufficientData(format!(
                "Wahba solution needs at least 2 observation pairs, got {}",
                self.count
            )));
        }
        let eig = symmetric_eigen(&self.k)?;
        let (smallest, second) = (eig.values[0], eig.values[1]);
        if second - smallest < OBA_EIGEN_GAP {
            return Err(Error::AmbiguousAttitude { smallest, second });
        }
        let v = eig.vectors.column(0);
        let q = Quaternion::new(v[0], Vector3::new(v[1], v[2], v[3])).canonical();
        let c = quat_to_dcm(&q)?;
        Ok((q, c))
    }
}

pub fn oba_accumulate(mut acc: WahbaAccumulator, u_n0: &Vector3<f64>, u_b0: &Vector3<f64>) -> WahbaAccumulator {
    acc.accumulate(u_n0, u_b0);
    acc
}

pub fn oba_solve(acc: &WahbaAccumulator) -> Result<(Quaternion, Dcm)> {
    acc.solve()
}

/// Alignment outcome for one window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadingEstimate {
    /// Method or network-variation tag, e.g. `I-OBA` or `HeadingNet10`.
    pub method: String,
    pub t_align: f64,
    pub psi_hat: Angle,
    pub psi_gt: Angle,
    /// `|angle_diff(psi_hat, psi_gt)|`, degrees.
    pub ae: f64,
}

impl HeadingEstimate {
    pub fn new(method: impl Into<String>, t_align: f64, psi_hat: Angle, psi_gt: Angle) -> Self {
        HeadingEstimate {
            method: method.into(),
            t_align,
            psi_hat,
            psi_gt,
            ae: absolute_error_deg(psi_hat, psi_gt),
        }
    }
}

/// Absolute cyclic heading error in degrees.
pub fn absolute_error_deg(psi_hat: Angle, psi: Angle) -> f64 {
    angle_diff(psi_hat, psi).radians().abs().to_degrees()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignConfig {
    /// Window fractions at which DVA samples its two observations.
    pub dva_fractions: (f64, f64),
    pub model: NavRateModel,
}

impl Default for AlignConfig {
    fn default() -> Self {
        AlignConfig {
            dva_fractions: (0.5, 1.0),
            model: NavRateModel::default(),
        }
    }
}

/// `C^{n0}_{b0}` estimated by `method` over one window.
pub fn estimate_initial_attitude(
    imu: &[ImuSample],
    aid: &[NavAidSample],
    method: AlignMethod,
    cfg: &AlignConfig,
) -> Result<(Dcm, FrameTracks)> {
    let tracks = FrameTracks::build(imu, aid, &cfg.model)?;
    let obs = observations(method.form(), imu, aid, &cfg.model, &tracks)?;
    let c = if method.is_dva() {
        let last = obs.len() - 1;
        let pick = |f: f64| -> Result<usize> {
            if !(0.0..=1.0).contains(&f) {
                return Err(Error::InvalidArgument(format!("DVA fraction {f} outside [0, 1]")));
            }
            Ok((f * last as f64).round() as usize)
        };
        let (j1, j2) = (pick(cfg.dva_fractions.0)?, pick(cfg.dva_fractions.1)?);
        dva_solve(&obs.u_n0[j1], &obs.u_n0[j2], &obs.u_b0[j1], &obs.u_b0[j2])?
    } else {
        let mut acc = WahbaAccumulator::new();
        for (un, ub) in obs.u_n0.iter().zip(&obs.u_b0) {
            acc.accumulate(un, ub);
        }
        acc.solve()?.1
    };
    Ok((c, tracks))
}

/// Heading at the end of the window given by `imu` and `aid`, scored against
/// the window's last aiding label.
pub fn align_window(
    imu: &[ImuSample],
    aid: &[NavAidSample],
    method: AlignMethod,
    cfg: &AlignConfig,
) -> Result<HeadingEstimate> {
    let (c, tracks) = estimate_initial_attitude(imu, aid, method, cfg)?;
    let last = aid.len() - 1;
    let attitude = tracks.recompose(&c, last);
    let psi_hat = dcm_to_heading(&attitude)?;
    let t_align = aid[last].t - aid[0].t;
    Ok(HeadingEstimate::new(method.name(), t_align, psi_hat, aid[last].heading_gt))
}

/// Aligns over `[0, t_align]` of a recording.
pub fn align_heading(rec: &Recording, method: AlignMethod, t_align: f64) -> Result<HeadingEstimate> {
    align_heading_with(rec, method, t_align, &AlignConfig::default())
}

pub fn align_heading_with(
    rec: &Recording,
    method: AlignMethod,
    t_align: f64,
    cfg: &AlignConfig,
) -> Result<HeadingEstimate> {
    if !(t_align >= 2.0) {
        return Err(Error::InvalidArgument(format!(
            "alignment time must be at least 2 s, got {t_align}"
        )));
    }
    let (imu, aid) = rec.window(0.0, t_align)?;
    align_window(imu, aid, method, cfg)
}
