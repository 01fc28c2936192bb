//! Attitude representations and conversions.
//!
//! Frames follow the marine INS convention: the navigation frame is
//! North-East-Down, the body frame is forward-right-down and heading is
//! positive clockwise from North. Euler angles use the Z-Y-X (yaw, pitch,
//! roll) sequence so that `C^n_b = Rz(yaw) * Ry(pitch) * Rx(roll)`.
//!
//! All angles are radians.

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this rotation angle the Rodrigues coefficients switch to their Taylor series.
pub const SMALL_ANGLE: f64 = 1e-8;

const ORTHONORMAL_TOL: f64 = 1e-9;
const POLAR_TOL: f64 = 1e-12;
const POLAR_MAX_ITER: usize = 50;

/// Cross-product matrix: `skew(v) * w == v.cross(&w)`.
pub fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Direction cosine matrix. Always a proper rotation when built through the
/// checked constructors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dcm(Matrix3<f64>);

impl Dcm {
    pub fn identity() -> Self {
        Dcm(Matrix3::identity())
    }

    /// Accepts `m` only if it is orthonormal with determinant +1 (both within 1e-9).
    pub fn try_new(m: Matrix3<f64>) -> Result<Self> {
        if !m.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidArgument("non-finite DCM entry".into()));
        }
        let err = orthonormality_error(&m);
        if err >= ORTHONORMAL_TOL {
            return Err(Error::InvalidArgument(format!(
                "matrix is not orthonormal (|C^T C - I|_inf = {err:.3e})"
            )));
        }
        let det = m.determinant();
        if (det - 1.0).abs() >= ORTHONORMAL_TOL {
            return Err(Error::InvalidArgument(format!(
                "matrix is not a proper rotation (det = {det})"
            )));
        }
        Ok(Dcm(m))
    }

    /// Wraps a matrix that is known to be a rotation up to round-off, e.g. a
    /// product of rotations.
    pub fn from_matrix_unchecked(m: Matrix3<f64>) -> Self {
        Dcm(m)
    }

    /// Nearest rotation to an arbitrary nonsingular matrix with positive determinant.
    pub fn nearest(m: &Matrix3<f64>) -> Result<Self> {
        nearest_rotation(m).map(Dcm)
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn into_inner(self) -> Matrix3<f64> {
        self.0
    }

    pub fn transpose(&self) -> Self {
        Dcm(self.0.transpose())
    }

    pub fn rotate(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.0 * v
    }

    /// `‖CᵀC − I‖_∞`.
    pub fn orthonormality_error(&self) -> f64 {
        orthonormality_error(&self.0)
    }

    /// Re-projects onto SO(3); used to remove integration drift.
    pub fn orthonormalized(&self) -> Self {
        // A DCM that went through the checked constructors is never singular.
        nearest_rotation(&self.0).map(Dcm).unwrap_or(*self)
    }

    /// Entry `c_ij` with 1-based indices, as written in navigation texts.
    pub fn c(&self, i: usize, j: usize) -> f64 {
        self.0[(i - 1, j - 1)]
    }
}

impl std::ops::Mul for Dcm {
    type Output = Dcm;

    fn mul(self, rhs: Dcm) -> Dcm {
        Dcm(self.0 * rhs.0)
    }
}

impl std::ops::Mul<Vector3<f64>> for Dcm {
    type Output = Vector3<f64>;

    fn mul(self, rhs: Vector3<f64>) -> Vector3<f64> {
        self.0 * rhs
    }
}

fn orthonormality_error(m: &Matrix3<f64>) -> f64 {
    (m.transpose() * m - Matrix3::identity()).abs().max()
}

/// Orthogonal polar factor of `m` by the Newton iteration `X ← (X + X⁻ᵀ)/2`.
pub fn nearest_rotation(m: &Matrix3<f64>) -> Result<Matrix3<f64>> {
    let det = m.determinant();
    if !det.is_finite() || det <= 0.0 {
        return Err(Error::DegenerateAttitude(format!(
            "cannot project matrix with determinant {det} onto SO(3)"
        )));
    }
    let mut x = *m;
    for _ in 0..POLAR_MAX_ITER {
        let inv_t = x
            .try_inverse()
            .ok_or_else(|| Error::DegenerateAttitude("singular matrix in polar iteration".into()))?
            .transpose();
        let next = (x + inv_t) * 0.5;
        let step = (next - x).abs().max();
        x = next;
        if step < POLAR_TOL {
            break;
        }
    }
    Ok(x)
}

/// Rotation vector (axis times angle), radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotVec(pub Vector3<f64>);

impl RotVec {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        RotVec(Vector3::new(x, y, z))
    }

    /// Same rotation with `‖v‖ < π`.
    pub fn canonical(self) -> Self {
        let n = self.0.norm();
        if n >= PI {
            let wrapped = self.0 - self.0 * (TAU / n);
            // angle exactly π stays on the input's side
            if wrapped.norm() >= PI {
                return self;
            }
            RotVec(wrapped)
        } else {
            self
        }
    }

    pub fn angle(&self) -> f64 {
        self.0.norm()
    }
}

/// Unit quaternion `[s, η]`, Hamilton convention; `C(q) v = q ⊗ v ⊗ q*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quaternion {
    pub s: f64,
    pub eta: Vector3<f64>,
}

impl Quaternion {
    pub fn new(s: f64, eta: Vector3<f64>) -> Self {
        Quaternion { s, eta }
    }

    pub fn identity() -> Self {
        Quaternion::new(1.0, Vector3::zeros())
    }

    pub fn from_axis_angle(axis: &Vector3<f64>, angle: f64) -> Self {
        let a = axis.normalize();
        let half = 0.5 * angle;
        Quaternion::new(half.cos(), a * half.sin())
    }

    pub fn norm(&self) -> f64 {
        (self.s * self.s + self.eta.norm_squared()).sqrt()
    }

    /// Unit norm with the scalar part made non-negative.
    pub fn canonical(&self) -> Self {
        let n = self.norm();
        let sign = if self.s < 0.0 { -1.0 } else { 1.0 };
        Quaternion::new(sign * self.s / n, self.eta * (sign / n))
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.s, self.eta.x, self.eta.y, self.eta.z]
    }
}

/// Angle in radians, wrapped to `(−π, π]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Angle(f64);

impl Angle {
    pub fn new(rad: f64) -> Self {
        Angle(wrap_angle(rad))
    }

    pub fn from_degrees(deg: f64) -> Self {
        Angle::new(deg.to_radians())
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn degrees(self) -> f64 {
        self.0.to_degrees()
    }
}

/// Representative of `a` in `(−π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let w = (a + PI).rem_euclid(TAU) - PI;
    if w <= -PI {
        w + TAU
    } else {
        w
    }
}

/// Rodrigues formula.
pub fn rotvec_to_dcm(phi: &RotVec) -> Result<Dcm> {
    let v = phi.0;
    if !v.iter().all(|x| x.is_finite()) {
        return Err(Error::InvalidArgument("non-finite rotation vector".into()));
    }
    Ok(Dcm(rodrigues(&v)))
}

/// Infallible Rodrigues for internal hot loops on finite input.
pub(crate) fn rodrigues(v: &Vector3<f64>) -> Matrix3<f64> {
    let x2 = v.norm_squared();
    let x = x2.sqrt();
    let (a, b) = if x < SMALL_ANGLE {
        (1.0 - x2 / 6.0, 0.5 - x2 / 24.0)
    } else {
        (x.sin() / x, (1.0 - x.cos()) / x2)
    };
    let k = skew(v);
    Matrix3::identity() + k * a + k * k * b
}

/// Inverse of [`rotvec_to_dcm`], returning the canonical rotation vector.
///
/// Goes through the quaternion so that angles near π stay well conditioned:
/// Shepperd's branch selection then reads the rotation axis off the dominant
/// diagonal of `C + Cᵀ`, which is the eigenvector of `C` for eigenvalue 1.
pub fn dcm_to_rotvec(c: &Dcm) -> RotVec {
    let q = dcm_to_quat(c);
    let n = q.eta.norm();
    if n == 0.0 {
        return RotVec(Vector3::zeros());
    }
    let angle = 2.0 * n.atan2(q.s);
    RotVec(q.eta * (angle / n)).canonical()
}

pub fn quat_to_dcm(q: &Quaternion) -> Result<Dcm> {
    let n = q.norm();
    if !n.is_finite() || (n - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidArgument(format!(
            "quaternion norm {n} deviates from 1 by more than 1e-6"
        )));
    }
    let (s, x, y, z) = (q.s, q.eta.x, q.eta.y, q.eta.z);
    Ok(Dcm(Matrix3::new(
        1.0 - 2.0 * (y * y + z * z),
        2.0 * (x * y - s * z),
        2.0 * (x * z + s * y),
        2.0 * (x * y + s * z),
        1.0 - 2.0 * (x * x + z * z),
        2.0 * (y * z - s * x),
        2.0 * (x * z - s * y),
        2.0 * (y * z + s * x),
        1.0 - 2.0 * (x * x + y * y),
    )))
}

/// Shepperd's method; result is canonical (`s ≥ 0`).
pub fn dcm_to_quat(c: &Dcm) -> Quaternion {
    let m = &c.0;
    let tr = m.trace();
    let d = [m[(0, 0)], m[(1, 1)], m[(2, 2)]];
    let q = if tr >= d[0] && tr >= d[1] && tr >= d[2] {
        let s = 0.5 * (1.0 + tr).sqrt();
        let f = 0.25 / s;
        Quaternion::new(
            s,
            Vector3::new(
                (m[(2, 1)] - m[(1, 2)]) * f,
                (m[(0, 2)] - m[(2, 0)]) * f,
                (m[(1, 0)] - m[(0, 1)]) * f,
            ),
        )
    } else if d[0] >= d[1] && d[0] >= d[2] {
        let x = 0.5 * (1.0 + 2.0 * d[0] - tr).sqrt();
        let f = 0.25 / x;
        Quaternion::new(
            (m[(2, 1)] - m[(1, 2)]) * f,
            Vector3::new(x, (m[(0, 1)] + m[(1, 0)]) * f, (m[(0, 2)] + m[(2, 0)]) * f),
        )
    } else if d[1] >= d[2] {
        let y = 0.5 * (1.0 + 2.0 * d[1] - tr).sqrt();
        let f = 0.25 / y;
        Quaternion::new(
            (m[(0, 2)] - m[(2, 0)]) * f,
            Vector3::new((m[(0, 1)] + m[(1, 0)]) * f, y, (m[(1, 2)] + m[(2, 1)]) * f),
        )
    } else {
        let z = 0.5 * (1.0 + 2.0 * d[2] - tr).sqrt();
        let f = 0.25 / z;
        Quaternion::new(
            (m[(1, 0)] - m[(0, 1)]) * f,
            Vector3::new((m[(0, 2)] + m[(2, 0)]) * f, (m[(1, 2)] + m[(2, 1)]) * f, z),
        )
    };
    q.canonical()
}

/// Elementary rotation about the down/z axis.
pub fn rot_z(a: f64) -> Dcm {
    let (s, c) = a.sin_cos();
    Dcm(Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0))
}

pub fn rot_y(a: f64) -> Dcm {
    let (s, c) = a.sin_cos();
    Dcm(Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c))
}

pub fn rot_x(a: f64) -> Dcm {
    let (s, c) = a.sin_cos();
    Dcm(Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c))
}

/// Yaw, pitch, roll in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Euler {
    pub yaw: f64,
    pub pitch: f64,
    pub roll: f64,
}

impl Euler {
    pub fn new(yaw: f64, pitch: f64, roll: f64) -> Self {
        Euler { yaw, pitch, roll }
    }

    /// `C^n_b` for the Z-Y-X sequence.
    pub fn to_dcm(&self) -> Dcm {
        let (sy, cy) = self.yaw.sin_cos();
        let (sp, cp) = self.pitch.sin_cos();
        let (sr, cr) = self.roll.sin_cos();
        Dcm(Matrix3::new(
            cy * cp,
            cy * sp * sr - sy * cr,
            cy * sp * cr + sy * sr,
            sy * cp,
            sy * sp * sr + cy * cr,
            sy * sp * cr - cy * sr,
            -sp,
            cp * sr,
            cp * cr,
        ))
    }
}

/// Heading of a body-to-NED DCM: `ψ = atan2(c_21, c_11)`.
pub fn dcm_to_heading(c: &Dcm) -> Result<Angle> {
    let c31 = c.c(3, 1);
    if c31.abs() > 1.0 - 1e-9 {
        return Err(Error::DegenerateAttitude(format!(
            "pitch too close to ±90° (c_31 = {c31})"
        )));
    }
    Ok(Angle::new(c.c(2, 1).atan2(c.c(1, 1))))
}

/// Signed difference `a − b` wrapped to `(−π, π]`.
pub fn angle_diff(a: Angle, b: Angle) -> Angle {
    let d = a.radians() - b.radians();
    Angle::new(d.sin().atan2(d.cos()))
}
