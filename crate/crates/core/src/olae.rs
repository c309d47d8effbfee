//! Optimal Linear Attitude Estimator over unified unit vectors.
//!
//! The Gibbs vector `g` of the optimal rotation solves `Mw g = z`, with
//!
//! ```text
//! B  = sum w vb va^T        S = B + B^T        p = tr(B) + 1
//! z  = -sum w vb x va       Mw = S - p I
//! ```
//!
//! and weights normalized to sum 1. The system becomes singular for half-turn
//! rotations, so it is also evaluated after pre-rotating the `b` frame by
//! 180 degrees about each axis; the candidate with the largest `|det(Mw)|` is
//! solved and the pre-rotation composed back.

use nalgebra::{Quaternion, UnitQuaternion};
use serde::{Deserialize, Serialize};

use crate::error::{AlignError, Result};
use crate::geometry::{canonical_quat, quat_from_gibbs, vee, GibbsVector, Mat3, Pose, Vec3};
use crate::primitives::PairingSet;
use crate::solver::{Diagnostics, Method, SolverResult};
use crate::unify::{build_olae_unit_vectors, UnifiedVectors};

/// Systems whose `|det(Mw)|` falls below this are treated as singular.
pub const MIN_DETERMINANT: f64 = 1e-12;

/// Half-turn pre-rotation applied to the `b` frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RotationAxis {
    None,
    X,
    Y,
    Z,
}

impl RotationAxis {
    pub const ALL: [RotationAxis; 4] = [Self::None, Self::X, Self::Y, Self::Z];

    pub fn quaternion(self) -> UnitQuaternion<f64> {
        let q = match self {
            Self::None => Quaternion::new(1.0, 0.0, 0.0, 0.0),
            Self::X => Quaternion::new(0.0, 1.0, 0.0, 0.0),
            Self::Y => Quaternion::new(0.0, 0.0, 1.0, 0.0),
            Self::Z => Quaternion::new(0.0, 0.0, 0.0, 1.0),
        };
        UnitQuaternion::new_unchecked(q)
    }

    /// Diagonal of the half-turn rotation matrix.
    fn signs(self) -> [f64; 3] {
        match self {
            Self::None => [1.0, 1.0, 1.0],
            Self::X => [1.0, -1.0, -1.0],
            Self::Y => [-1.0, 1.0, -1.0],
            Self::Z => [-1.0, -1.0, 1.0],
        }
    }
}

/// Attitude profile matrix and the linear system derived from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OlaeSystem {
    pub b: Mat3,
    pub s: Mat3,
    pub p: f64,
    /// `tr(B) - 1`; kept alongside `p` although the `Mw` system never uses it.
    pub m: f64,
    pub z: Vec3,
    pub mw: Mat3,
}

impl OlaeSystem {
    fn with_z(b: Mat3, z: Vec3) -> Self {
        let s = b + b.transpose();
        let tr = b.trace();
        let p = tr + 1.0;
        Self {
            b,
            s,
            p,
            m: tr - 1.0,
            z,
            mw: s - Mat3::identity() * p,
        }
    }

    /// Builds the system from `B` alone, using `[z]x = B - B^T`.
    pub fn from_profile(b: Mat3) -> Self {
        Self::with_z(b, vee(&(b - b.transpose())))
    }

    /// System for `b`-frame vectors pre-rotated by a half turn about `axis`.
    pub fn rotated(&self, axis: RotationAxis) -> Self {
        if axis == RotationAxis::None {
            return *self;
        }
        let signs = axis.signs();
        let mut b = self.b;
        for (i, sign) in signs.iter().enumerate() {
            b.row_mut(i).scale_mut(*sign);
        }
        Self::from_profile(b)
    }

    pub fn determinant(&self) -> f64 {
        self.mw.determinant()
    }
}

pub fn attitude_profile(uv: &UnifiedVectors) -> OlaeSystem {
    let mut b = Mat3::zeros();
    let mut z = Vec3::zeros();
    for ((va, vb), w) in uv.va.iter().zip(&uv.vb).zip(&uv.weights) {
        b += (vb * va.transpose()) * *w;
        z -= vb.cross(va) * *w;
    }
    OlaeSystem::with_z(b, z)
}

/// Picks the candidate system with the largest `|det(Mw)|`.
///
/// Returns the chosen axis, its system and the four `|det|` values in
/// `RotationAxis::ALL` order.
pub fn sequential_rotation_select(
    sys: &OlaeSystem,
) -> Result<(RotationAxis, OlaeSystem, [f64; 4])> {
    let candidates = RotationAxis::ALL.map(|axis| sys.rotated(axis));
    let dets = candidates.map(|c| c.determinant().abs());
    let best = (0..4)
        .max_by(|&i, &j| dets[i].total_cmp(&dets[j]))
        .unwrap_or(0);
    if dets[best] < MIN_DETERMINANT {
        return Err(AlignError::DegenerateGeometry(format!(
            "all OLAE systems are singular (|det| = {dets:?})"
        )));
    }
    Ok((RotationAxis::ALL[best], candidates[best], dets))
}

/// Solves `m x = rhs` by Gaussian elimination with partial pivoting.
pub fn solve_linear3(m: &Mat3, rhs: &Vec3) -> Result<Vec3> {
    let mut a = [[0.0; 4]; 3];
    for (i, row) in a.iter_mut().enumerate() {
        for j in 0..3 {
            row[j] = m[(i, j)];
        }
        row[3] = rhs[i];
    }
    let scale = m.amax();
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap_or(col);
        if a[pivot][col].abs() <= MIN_DETERMINANT * scale.max(f64::MIN_POSITIVE) {
            return Err(AlignError::DegenerateGeometry(
                "singular 3x3 system".into(),
            ));
        }
        a.swap(col, pivot);
        for r in (col + 1)..3 {
            let f = a[r][col] / a[col][col];
            for c in col..4 {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    let mut x = Vec3::zeros();
    for r in (0..3).rev() {
        let tail: f64 = ((r + 1)..3).map(|c| a[r][c] * x[c]).sum();
        x[r] = (a[r][3] - tail) / a[r][r];
    }
    Ok(x)
}

/// Rotation recovered from a system pre-rotated about `axis`.
pub fn rotation_from_system(rotated: &OlaeSystem, axis: RotationAxis) -> Result<UnitQuaternion<f64>> {
    let g = solve_linear3(&rotated.mw, &rotated.z)?;
    let q = quat_from_gibbs(&GibbsVector(g));
    Ok(canonical_quat(q * axis.quaternion()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OlaeOptions {
    /// Disable to always solve the unrotated system.
    pub sequential_rotations: bool,
}

impl Default for OlaeOptions {
    fn default() -> Self {
        Self {
            sequential_rotations: true,
        }
    }
}

pub fn solve_olae(pairings: &PairingSet, s_t: Option<f64>) -> Result<SolverResult> {
    solve_olae_with(pairings, s_t, &OlaeOptions::default())
}

pub fn solve_olae_with(
    pairings: &PairingSet,
    s_t: Option<f64>,
    opts: &OlaeOptions,
) -> Result<SolverResult> {
    let uv = build_olae_unit_vectors(pairings, s_t)?;
    let sys = attitude_profile(&uv);

    let (axis, chosen, dets) = if opts.sequential_rotations {
        sequential_rotation_select(&sys)?
    } else {
        let d = sys.determinant().abs();
        if d < MIN_DETERMINANT {
            return Err(AlignError::DegenerateGeometry(format!(
                "OLAE system is singular (|det| = {d:e})"
            )));
        }
        (RotationAxis::None, sys, [d, f64::NAN, f64::NAN, f64::NAN])
    };
    let rotation = rotation_from_system(&chosen, axis)?;
    let translation = uv.centroid_a - rotation * uv.centroid_b;

    let mut diagnostics = Diagnostics::closed_form(Method::Olae);
    diagnostics.determinants = Some(dets);
    diagnostics.sequential_axis = Some(axis);
    Ok(SolverResult {
        pose: Pose::new(rotation, translation),
        inlier_point_indices: uv.inlier_point_indices,
        outlier_point_indices: uv.outlier_point_indices,
        diagnostics,
    })
}
