//! Rigid-body representations and error metrics.
//!
//! Rotations are carried as unit quaternions with the scalar part kept
//! non-negative, so two equal rotations always compare equal component-wise.
//! Tangent vectors of SE(3) are ordered `(translation, rotation)`.

use std::ops::Mul;

use nalgebra::{Matrix3, Quaternion, Unit, UnitQuaternion, Vector3, Vector6};
use serde::{Deserialize, Serialize};

pub type Vec3 = Vector3<f64>;
pub type UnitVec3 = Unit<Vector3<f64>>;
pub type Mat3 = Matrix3<f64>;
pub type Vec6 = Vector6<f64>;

/// Angles above `PI - NEAR_HALF_TURN` switch the logarithm to the diagonal
/// based axis extraction.
pub const NEAR_HALF_TURN: f64 = 1e-3;

const SERIES_THRESHOLD: f64 = 1e-3;

/// Flips the quaternion sign so that the scalar part is non-negative.
pub fn canonical_quat(q: UnitQuaternion<f64>) -> UnitQuaternion<f64> {
    if q.w < 0.0 {
        UnitQuaternion::new_unchecked(-q.into_inner())
    } else {
        q
    }
}

/// Rodrigues (Gibbs) vector: rotation axis scaled by `tan(angle / 2)`.
///
/// Cannot represent half-turn rotations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GibbsVector(pub Vec3);

impl GibbsVector {
    pub fn new(gx: f64, gy: f64, gz: f64) -> Self {
        Self(Vec3::new(gx, gy, gz))
    }

    /// Gibbs vector of a rotation, or `None` for (numerically) half turns.
    pub fn from_quaternion(q: &UnitQuaternion<f64>) -> Option<Self> {
        let q = canonical_quat(*q);
        if q.w < 1e-12 {
            return None;
        }
        Some(Self(q.imag() / q.w))
    }

    pub fn to_quaternion(&self) -> UnitQuaternion<f64> {
        quat_from_gibbs(self)
    }
}

/// Converts a Gibbs vector into the equivalent canonical unit quaternion.
pub fn quat_from_gibbs(g: &GibbsVector) -> UnitQuaternion<f64> {
    let qr = 1.0 / (1.0 + g.0.norm_squared()).sqrt();
    let v = g.0 * qr;
    // Renormalize to absorb rounding in the square root.
    UnitQuaternion::new_normalize(Quaternion::new(qr, v.x, v.y, v.z))
}

pub fn skew(v: &Vec3) -> Mat3 {
    Mat3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Inverse of [`skew`] applied to the antisymmetric part of `m`.
pub fn vee(m: &Mat3) -> Vec3 {
    Vec3::new(
        0.5 * (m[(2, 1)] - m[(1, 2)]),
        0.5 * (m[(0, 2)] - m[(2, 0)]),
        0.5 * (m[(1, 0)] - m[(0, 1)]),
    )
}

/// Rotation angle of a rotation matrix in `[0, pi]`.
pub fn rotation_angle(r: &Mat3) -> f64 {
    let s = vee(r).norm();
    let c = 0.5 * (r.trace() - 1.0);
    s.atan2(c.clamp(-1.0, 1.0))
}

/// Guarded SO(3) logarithm. Returns the rotation vector and whether the angle
/// was close enough to a half turn to require the diagonal-based axis.
pub fn so3_log(r: &Mat3) -> (Vec3, bool) {
    let w = vee(r);
    let s = w.norm();
    let c = (0.5 * (r.trace() - 1.0)).clamp(-1.0, 1.0);
    let theta = s.atan2(c);

    if theta < SERIES_THRESHOLD {
        let t2 = theta * theta;
        return (w * (1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0), false);
    }
    if theta <= std::f64::consts::PI - NEAR_HALF_TURN {
        return (w * (theta / s), false);
    }

    // n n^T = (sym(R) - cos I) / (1 - cos)
    let sym = 0.5 * (r + r.transpose());
    let outer = (sym - Mat3::identity() * c) / (1.0 - c);
    let k = (0..3)
        .max_by(|&i, &j| outer[(i, i)].total_cmp(&outer[(j, j)]))
        .unwrap_or(0);
    let mut axis: Vec3 = outer.column(k) / outer[(k, k)].max(0.0).sqrt();
    axis.normalize_mut();
    if axis.dot(&w) < 0.0 {
        axis = -axis;
    }
    (axis * theta, true)
}

/// `||log(R_gt^T R_est)||`, the geodesic distance between two rotations.
pub fn rotation_error(r_est: &Mat3, r_gt: &Mat3) -> f64 {
    rotation_angle(&(r_gt.transpose() * r_est))
}

/// Rigid transform `x -> R x + t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub rotation: UnitQuaternion<f64>,
    pub translation: Vec3,
}

impl Default for Pose {
    fn default() -> Self {
        Self::identity()
    }
}

impl Pose {
    pub fn new(rotation: UnitQuaternion<f64>, translation: Vec3) -> Self {
        Self {
            rotation: canonical_quat(rotation),
            translation,
        }
    }

    pub fn identity() -> Self {
        Self::new(UnitQuaternion::identity(), Vec3::zeros())
    }

    pub fn from_rotation(rotation: UnitQuaternion<f64>) -> Self {
        Self::new(rotation, Vec3::zeros())
    }

    pub fn from_translation(translation: Vec3) -> Self {
        Self::new(UnitQuaternion::identity(), translation)
    }

    pub fn rotation_matrix(&self) -> Mat3 {
        self.rotation.to_rotation_matrix().into_inner()
    }

    pub fn transform_point(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    pub fn rotate(&self, v: &Vec3) -> Vec3 {
        self.rotation * v
    }

    pub fn inverse(&self) -> Self {
        let inv = self.rotation.inverse();
        Self::new(inv, -(inv * self.translation))
    }

    /// Rotation and translation errors of `self` against a reference pose.
    pub fn errors_to(&self, gt: &Pose) -> (f64, f64) {
        (
            rotation_error(&self.rotation_matrix(), &gt.rotation_matrix()),
            (self.translation - gt.translation).norm(),
        )
    }
}

impl Mul for Pose {
    type Output = Pose;

    fn mul(self, rhs: Pose) -> Pose {
        Pose::new(
            self.rotation * rhs.rotation,
            self.rotation * rhs.translation + self.translation,
        )
    }
}

fn left_jacobian_coeffs(theta: f64) -> (f64, f64) {
    if theta < SERIES_THRESHOLD {
        let t2 = theta * theta;
        (0.5 - t2 / 24.0, 1.0 / 6.0 - t2 / 120.0)
    } else {
        let half = (0.5 * theta).sin();
        let t2 = theta * theta;
        (2.0 * half * half / t2, (theta - theta.sin()) / (t2 * theta))
    }
}

/// SE(3) exponential of `xi = (v, omega)`.
pub fn se3_exp(xi: &Vec6) -> Pose {
    let v = xi.fixed_rows::<3>(0).into_owned();
    let omega = xi.fixed_rows::<3>(3).into_owned();
    let theta = omega.norm();
    let k = skew(&omega);
    let (a, b) = left_jacobian_coeffs(theta);
    let jl = Mat3::identity() + k * a + k * k * b;
    Pose::new(UnitQuaternion::from_scaled_axis(omega), jl * v)
}

/// Result of [`se3_log`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Se3Log {
    pub xi: Vec6,
    /// Rotation angle within `NEAR_HALF_TURN` of pi; the axis came from the
    /// diagonal-based extraction and the map is no longer locally invertible.
    pub near_singular: bool,
}

pub fn se3_log(pose: &Pose) -> Se3Log {
    let (omega, near_singular) = so3_log(&pose.rotation_matrix());
    let theta = omega.norm();
    let k = skew(&omega);
    let c = if theta < SERIES_THRESHOLD {
        let t2 = theta * theta;
        1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0
    } else {
        let half = 0.5 * theta;
        (1.0 - half / half.tan()) / (theta * theta)
    };
    let jl_inv = Mat3::identity() - k * 0.5 + k * k * c;
    let v = jl_inv * pose.translation;
    Se3Log {
        xi: Vec6::new(v.x, v.y, v.z, omega.x, omega.y, omega.z),
        near_singular,
    }
}

/// Norm of the tangent between two poses, split into rotation angle plus
/// translation distance.
pub fn pose_delta_norm(from: &Pose, to: &Pose) -> f64 {
    let delta = *to * from.inverse();
    let (omega, _) = so3_log(&delta.rotation_matrix());
    omega.norm() + delta.translation.norm()
}
