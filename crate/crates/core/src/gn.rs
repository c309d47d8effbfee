//! Gauss-Newton refinement over SE(3) with multi-primitive residuals.
//!
//! Increments are applied on the left, `T <- exp(xi) T`, with
//! `xi = (rho, omega)`. For a transformed point `p = R b + t` this gives
//! `dp/dxi = [I | -[p]x]`, from which every Jacobian below follows.

use nalgebra::{Cholesky, DVector, Matrix6, MatrixXx6, RowVector6, SymmetricEigen, Vector6};

use crate::error::{AlignError, Result};
use crate::geometry::{se3_exp, skew, Pose, Vec3};
use crate::icp::robust_weight;
use crate::primitives::PairingSet;
use crate::solver::{Diagnostics, Method, SolverResult};

pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GnOptions {
    pub max_iterations: usize,
    /// Stop once the increment norm drops below this.
    pub epsilon_step: f64,
    /// Geman-McClure scale for iteratively reweighted residuals.
    pub robust_delta: Option<f64>,
}

impl Default for GnOptions {
    fn default() -> Self {
        Self {
            max_iterations: 50,
            epsilon_step: 1e-10,
            robust_delta: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ResidualKind {
    PointToPoint,
    PointToPlane,
    PlaneToPlane,
    LineToLine,
}

impl ResidualKind {
    pub fn rows(self) -> usize {
        match self {
            Self::PointToPlane => 1,
            _ => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualBlock {
    pub kind: ResidualKind,
    pub residual: DVector<f64>,
    pub jacobian: MatrixXx6<f64>,
    pub weight: f64,
}

impl ResidualBlock {
    fn three(kind: ResidualKind, r: Vec3, rho: nalgebra::Matrix3<f64>, omega: nalgebra::Matrix3<f64>, weight: f64) -> Self {
        let mut jacobian = MatrixXx6::zeros(3);
        jacobian.fixed_view_mut::<3, 3>(0, 0).copy_from(&rho);
        jacobian.fixed_view_mut::<3, 3>(0, 3).copy_from(&omega);
        Self {
            kind,
            residual: DVector::from_column_slice(r.as_slice()),
            jacobian,
            weight,
        }
    }

    pub fn squared_norm(&self) -> f64 {
        self.residual.norm_squared()
    }
}

/// Residuals and left-increment Jacobians of every pairing at `pose`.
///
/// * point-to-point: `a - T(b)`
/// * point-to-plane: `n_a . (T(b) - c_a)`
/// * plane-to-plane: `n_a - R n_b`
/// * line-to-line: `d_a - R d_b`
pub fn residuals_and_jacobian(pairings: &PairingSet, pose: &Pose) -> Vec<ResidualBlock> {
    let kw = pairings.kind_weights;
    let mut out = Vec::with_capacity(pairings.len());

    for pp in &pairings.points {
        let p = pose.transform_point(&pp.b);
        out.push(ResidualBlock::three(
            ResidualKind::PointToPoint,
            pp.a - p,
            -nalgebra::Matrix3::identity(),
            skew(&p),
            pp.weight * kw.points,
        ));
    }
    for lp in &pairings.lines {
        let m = pose.rotate(&lp.b.director);
        out.push(ResidualBlock::three(
            ResidualKind::LineToLine,
            lp.a.director.into_inner() - m,
            nalgebra::Matrix3::zeros(),
            skew(&m),
            lp.weight * kw.lines,
        ));
    }
    for pl in &pairings.planes {
        let m = pose.rotate(&pl.b.normal);
        out.push(ResidualBlock::three(
            ResidualKind::PlaneToPlane,
            pl.a.normal.into_inner() - m,
            nalgebra::Matrix3::zeros(),
            skew(&m),
            pl.weight * kw.planes,
        ));
    }
    for pp in &pairings.point_planes {
        let p = pose.transform_point(&pp.point_b);
        let n = pp.plane_a.normal.into_inner();
        let pxn = p.cross(&n);
        let row = RowVector6::new(n.x, n.y, n.z, pxn.x, pxn.y, pxn.z);
        out.push(ResidualBlock {
            kind: ResidualKind::PointToPlane,
            residual: DVector::from_element(1, pp.plane_a.signed_distance(&p)),
            jacobian: MatrixXx6::from_rows(&[row]),
            // Point-to-plane pairs count as point observations.
            weight: pp.weight * kw.points,
        });
    }
    out
}

fn block_weight(block: &ResidualBlock, robust_delta: Option<f64>) -> Result<f64> {
    Ok(match robust_delta {
        Some(delta) => block.weight * robust_weight(block.squared_norm().sqrt(), delta)?,
        None => block.weight,
    })
}

/// Weighted cost `sum w ||r||^2` at `pose`.
pub fn total_cost(pairings: &PairingSet, pose: &Pose, robust_delta: Option<f64>) -> Result<f64> {
    residuals_and_jacobian(pairings, pose)
        .iter()
        .map(|b| Ok(block_weight(b, robust_delta)? * b.squared_norm()))
        .sum()
}

/// Gauss-Newton from `initial`.
///
/// Hitting the iteration cap is not an error: the last pose is returned with
/// `diagnostics.converged == false`.
pub fn solve_gn(pairings: &PairingSet, initial: &Pose, opts: &GnOptions) -> Result<SolverResult> {
    if opts.max_iterations == 0 {
        return Err(AlignError::InvalidThreshold(0.0));
    }
    if !(opts.epsilon_step > 0.0) {
        return Err(AlignError::InvalidThreshold(opts.epsilon_step));
    }
    if let Some(d) = opts.robust_delta {
        if !(d > 0.0) {
            return Err(AlignError::InvalidThreshold(d));
        }
    }
    pairings.validate_weights()?;

    let mut pose = *initial;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iterations {
        iterations += 1;
        let step = gn_step(pairings, &pose, opts.robust_delta)?;
        pose = se3_exp(&step) * pose;
        if step.norm() < opts.epsilon_step {
            converged = true;
            break;
        }
    }

    let mut diagnostics = Diagnostics::closed_form(Method::GaussNewton);
    diagnostics.iterations = iterations;
    diagnostics.converged = converged;
    diagnostics.final_cost = Some(total_cost(pairings, &pose, opts.robust_delta)?);
    Ok(SolverResult {
        pose,
        inlier_point_indices: (0..pairings.points.len()).collect(),
        outlier_point_indices: Vec::new(),
        diagnostics,
    })
}

/// One Gauss-Newton increment `-(J^T W J)^-1 J^T W r` at `pose`.
pub fn gn_step(pairings: &PairingSet, pose: &Pose, robust_delta: Option<f64>) -> Result<Vector6<f64>> {
    let mut h = Matrix6::<f64>::zeros();
    let mut g = Vector6::<f64>::zeros();
    for block in residuals_and_jacobian(pairings, pose) {
        let w = block_weight(&block, robust_delta)?;
        let jt = block.jacobian.transpose();
        h += &jt * &block.jacobian * w;
        g += &jt * &block.residual * w;
    }

    let eig = SymmetricEigen::new(h);
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if !(min > 0.0) || max / min > MAX_CONDITION {
        let condition = if min > 0.0 { max / min } else { f64::INFINITY };
        return Err(AlignError::SingularHessian { condition });
    }
    let chol = Cholesky::new(h).ok_or(AlignError::SingularHessian {
        condition: max / min,
    })?;
    Ok(-chol.solve(&g))
}
