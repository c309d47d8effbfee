//! Horn's optimal quaternion over unified vectors.

use nalgebra::{Quaternion, UnitQuaternion};

use crate::error::{AlignError, Result};
use crate::geometry::{canonical_quat, Pose};
use crate::primitives::PairingSet;
use crate::solver::{Diagnostics, Method, SolverResult};
use crate::unify::{build_horn_vectors, UnifiedVectors};

const JACOBI_TOLERANCE: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 30;
const EIGEN_GAP_TOLERANCE: f64 = 1e-9;

/// Eigen-decomposition of a symmetric 4x4 matrix by cyclic Jacobi rotations.
/// Returns eigenvalues and the matching eigenvectors stored as columns.
pub fn symmetric_eigen4(m: &[[f64; 4]; 4]) -> ([f64; 4], [[f64; 4]; 4]) {
    let mut a = *m;
    let mut v = [[0.0; 4]; 4];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let scale: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    if scale == 0.0 {
        return ([0.0; 4], v);
    }

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..4)
            .flat_map(|i| (0..4).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= JACOBI_TOLERANCE * scale {
            break;
        }
        for p in 0..3 {
            for q in (p + 1)..4 {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for row in a.iter_mut() {
                    let (kp, kq) = (row[p], row[q]);
                    row[p] = c * kp - s * kq;
                    row[q] = s * kp + c * kq;
                }
                for k in 0..4 {
                    let (pk, qk) = (a[p][k], a[q][k]);
                    a[p][k] = c * pk - s * qk;
                    a[q][k] = s * pk + c * qk;
                }
                for row in v.iter_mut() {
                    let (kp, kq) = (row[p], row[q]);
                    row[p] = c * kp - s * kq;
                    row[q] = s * kp + c * kq;
                }
            }
        }
    }
    ([a[0][0], a[1][1], a[2][2], a[3][3]], v)
}

/// Symmetric 4x4 matrix whose dominant eigenvector is the optimal rotation.
fn profile_matrix(uv: &UnifiedVectors) -> [[f64; 4]; 4] {
    // s[i][j] = sum w * vb_i * va_j
    let mut s = [[0.0; 3]; 3];
    for ((a, b), w) in uv.va.iter().zip(&uv.vb).zip(&uv.weights) {
        for i in 0..3 {
            for j in 0..3 {
                s[i][j] += w * b[i] * a[j];
            }
        }
    }
    let [[sxx, sxy, sxz], [syx, syy, syz], [szx, szy, szz]] = s;
    [
        [sxx + syy + szz, syz - szy, szx - sxz, sxy - syx],
        [syz - szy, sxx - syy - szz, sxy + syx, szx + sxz],
        [szx - sxz, sxy + syx, -sxx + syy - szz, syz + szy],
        [sxy - syx, szx + sxz, syz + szy, -sxx - syy + szz],
    ]
}

/// Rotation `R` maximizing `sum w va . (R vb)`.
pub fn horn_rotation(uv: &UnifiedVectors) -> Result<UnitQuaternion<f64>> {
    if uv.len() < 2 {
        return Err(AlignError::DegenerateGeometry(
            "at least two vector pairs are required".into(),
        ));
    }
    let (values, vectors) = symmetric_eigen4(&profile_matrix(uv));
    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
    let (best, second) = (values[order[0]], values[order[1]]);
    if best - second <= EIGEN_GAP_TOLERANCE * best.abs().max(f64::MIN_POSITIVE) {
        return Err(AlignError::DegenerateGeometry(format!(
            "dominant eigenvalue is not unique ({best:e} vs {second:e})"
        )));
    }
    let k = order[0];
    let q = Quaternion::new(vectors[0][k], vectors[1][k], vectors[2][k], vectors[3][k]);
    Ok(canonical_quat(UnitQuaternion::new_normalize(q)))
}

/// Rigid registration with Horn's method over all primitive kinds.
pub fn solve_horn(pairings: &PairingSet, s_t: Option<f64>) -> Result<SolverResult> {
    let uv = build_horn_vectors(pairings, s_t)?;
    let rotation = horn_rotation(&uv)?;
    let translation = uv.centroid_a - rotation * uv.centroid_b;
    Ok(SolverResult {
        pose: Pose::new(rotation, translation),
        inlier_point_indices: uv.inlier_point_indices,
        outlier_point_indices: uv.outlier_point_indices,
        diagnostics: Diagnostics::closed_form(Method::Horn),
    })
}
