//! Iterative closest point/primitive alignment of two metric maps.
//!
//! Each iteration pairs every point of `map_b` with its nearest neighbour in
//! `map_a` and every plane of `map_b` with the `map_a` plane of nearest
//! centroid (subject to a normal-angle gate), then re-solves the full pose
//! with the configured solver. Lines are not associated.

use std::sync::OnceLock;

use crate::error::{AlignError, Result};
use crate::geometry::{pose_delta_norm, Pose, Vec3};
use crate::kdtree::{squared_distance, KdTree};
use crate::primitives::{Line, PairingSet, Plane};
use crate::solver::SolverConfig;

/// Geman-McClure weight `delta^2 / (delta^2 + r^2)`.
pub fn robust_weight(residual_norm: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(AlignError::InvalidThreshold(delta));
    }
    let d2 = delta * delta;
    Ok(d2 / (d2 + residual_norm * residual_norm))
}

#[derive(Debug, Clone, Default)]
pub struct MetricMap {
    pub points: Vec<Vec3>,
    pub lines: Vec<Line>,
    pub planes: Vec<Plane>,
    index: OnceLock<KdTree>,
}

impl MetricMap {
    pub fn from_points(points: Vec<Vec3>) -> Self {
        Self {
            points,
            ..Self::default()
        }
    }

    pub fn new(points: Vec<Vec3>, lines: Vec<Line>, planes: Vec<Plane>) -> Self {
        Self {
            points,
            lines,
            planes,
            index: OnceLock::new(),
        }
    }

    /// Point index, built on first use.
    pub fn index(&self) -> &KdTree {
        self.index.get_or_init(|| KdTree::new(&self.points))
    }

    pub fn transformed(&self, pose: &Pose) -> Self {
        Self::new(
            self.points.iter().map(|p| pose.transform_point(p)).collect(),
            self.lines.iter().map(|l| crate::primitives::transform_line(pose, l)).collect(),
            self.planes.iter().map(|p| crate::primitives::transform_plane(pose, p)).collect(),
        )
    }

    /// Largest side of the axis-aligned bounding box of the points.
    pub fn bbox_max_side(&self) -> f64 {
        if self.points.is_empty() {
            return 0.0;
        }
        let mut min = Vec3::repeat(f64::INFINITY);
        let mut max = Vec3::repeat(f64::NEG_INFINITY);
        for p in &self.points {
            min = min.inf(p);
            max = max.sup(p);
        }
        (max - min).max()
    }

    /// Median over points of the distance to their nearest other point.
    pub fn median_nn_spacing(&self) -> f64 {
        if self.points.len() < 2 {
            return 0.0;
        }
        let mut d: Vec<f64> = self
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| {
                self.points
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, q)| squared_distance(p, q))
                    .fold(f64::INFINITY, f64::min)
                    .sqrt()
            })
            .collect();
        let mid = d.len() / 2;
        *d.select_nth_unstable_by(mid, f64::total_cmp).1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointMatch {
    pub a_index: usize,
    pub b_index: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneMatch {
    pub a_index: usize,
    pub b_index: usize,
    /// Angle between `n_a` and the transformed `n_b`.
    pub angle: f64,
}

/// Nearest `map_a` point for every transformed `map_b` point within `max_dist`.
/// Several `b` points may share one `a` point.
pub fn match_points(map_a: &MetricMap, map_b: &MetricMap, pose: &Pose, max_dist: f64) -> Vec<PointMatch> {
    let tree = map_a.index();
    let max_d2 = max_dist * max_dist;
    map_b
        .points
        .iter()
        .enumerate()
        .filter_map(|(b_index, b)| {
            let (a_index, d2) = tree.nearest(&pose.transform_point(b))?;
            (d2 <= max_d2).then(|| PointMatch {
                a_index,
                b_index,
                distance: d2.sqrt(),
            })
        })
        .collect()
}

/// For every transformed `map_b` plane, the `map_a` plane with the nearest
/// centroid, kept when the normals differ by at most `normal_max_angle`.
pub fn match_planes(map_a: &MetricMap, map_b: &MetricMap, pose: &Pose, normal_max_angle: f64) -> Vec<PlaneMatch> {
    if map_a.planes.is_empty() {
        return Vec::new();
    }
    map_b
        .planes
        .iter()
        .enumerate()
        .filter_map(|(b_index, pb)| {
            let c = pose.transform_point(&pb.centroid);
            let n = pose.rotate(&pb.normal);
            let (a_index, _) = map_a
                .planes
                .iter()
                .enumerate()
                .map(|(i, pa)| (i, squared_distance(&pa.centroid, &c)))
                .fold((usize::MAX, f64::INFINITY), |best, cur| {
                    if cur.1 < best.1 {
                        cur
                    } else {
                        best
                    }
                });
            let angle = map_a.planes[a_index].normal.dot(&n).clamp(-1.0, 1.0).acos();
            (angle <= normal_max_angle).then_some(PlaneMatch {
                a_index,
                b_index,
                angle,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IcpParams {
    pub max_iterations: usize,
    /// Stop once the pose change between iterations (rotation angle plus
    /// translation distance) falls below this.
    pub convergence_epsilon: f64,
    pub max_point_pair_distance: f64,
    pub plane_normal_max_angle: f64,
    pub solver: SolverConfig,
    pub robust_delta: Option<f64>,
    /// Robust weighting is only applied when the initial pose is trusted.
    pub initial_guess_known: bool,
}

impl IcpParams {
    pub fn new(solver: SolverConfig, max_point_pair_distance: f64) -> Self {
        Self {
            max_iterations: 100,
            convergence_epsilon: 1e-9,
            max_point_pair_distance,
            plane_normal_max_angle: 0.35,
            solver,
            robust_delta: None,
            initial_guess_known: false,
        }
    }

    fn validate(&self) -> Result<()> {
        for v in [self.convergence_epsilon, self.max_point_pair_distance] {
            if !(v > 0.0) {
                return Err(AlignError::InvalidThreshold(v));
            }
        }
        let a = self.plane_normal_max_angle;
        if !(a > 0.0 && a <= std::f64::consts::FRAC_PI_2) {
            return Err(AlignError::InvalidThreshold(a));
        }
        if let Some(d) = self.robust_delta {
            robust_weight(0.0, d)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IcpResult {
    pub pose: Pose,
    pub iterations: usize,
    pub point_pairs: usize,
    pub plane_pairs: usize,
    pub converged: bool,
    /// Pose change produced by each iteration.
    pub delta_trace: Vec<f64>,
    /// Mean point-pair distance at the start of each iteration.
    pub mean_residual_trace: Vec<f64>,
    /// RMS point-pair distance after re-matching at the final pose.
    pub final_rmse: f64,
}

fn pairings_from_matches(
    map_a: &MetricMap,
    map_b: &MetricMap,
    pose: &Pose,
    points: &[PointMatch],
    planes: &[PlaneMatch],
    robust_delta: Option<f64>,
) -> Result<PairingSet> {
    let weight = |r: f64| match robust_delta {
        Some(d) => robust_weight(r, d),
        None => Ok(1.0),
    };
    let mut set = PairingSet::new();
    for m in points {
        set.push_point(map_a.points[m.a_index], map_b.points[m.b_index], weight(m.distance)?);
    }
    for m in planes {
        let (a, b) = (map_a.planes[m.a_index], map_b.planes[m.b_index]);
        let r = (a.normal.into_inner() - pose.rotate(&b.normal)).norm();
        set.push_plane(a, b, weight(r)?);
    }
    Ok(set)
}

fn rms(matches: &[PointMatch]) -> f64 {
    if matches.is_empty() {
        return f64::INFINITY;
    }
    (matches.iter().map(|m| m.distance * m.distance).sum::<f64>() / matches.len() as f64).sqrt()
}

/// Aligns `map_b` onto `map_a` starting from `initial`.
pub fn icp_align(map_a: &MetricMap, map_b: &MetricMap, initial: &Pose, params: &IcpParams) -> Result<IcpResult> {
    params.validate()?;
    let robust = if params.initial_guess_known {
        params.robust_delta
    } else {
        None
    };

    let mut pose = *initial;
    let mut result = IcpResult {
        pose,
        iterations: 0,
        point_pairs: 0,
        plane_pairs: 0,
        converged: false,
        delta_trace: Vec::new(),
        mean_residual_trace: Vec::new(),
        final_rmse: f64::INFINITY,
    };

    for iteration in 1..=params.max_iterations {
        let points = match_points(map_a, map_b, &pose, params.max_point_pair_distance);
        let planes = match_planes(map_a, map_b, &pose, params.plane_normal_max_angle);
        if points.is_empty() || points.len() + planes.len() < 3 {
            return Err(AlignError::NoCorrespondences {
                iteration,
                found: points.len() + planes.len(),
                required: 3,
            });
        }
        result.mean_residual_trace.push(
            points.iter().map(|m| m.distance).sum::<f64>() / points.len() as f64,
        );

        let set = pairings_from_matches(map_a, map_b, &pose, &points, &planes, robust)?;
        let solved = params
            .solver
            .solve(&set, &pose)
            .map_err(|e| AlignError::Solver {
                iteration,
                source: Box::new(e),
            })?;

        let delta = pose_delta_norm(&pose, &solved.pose);
        pose = solved.pose;
        result.iterations = iteration;
        result.point_pairs = points.len();
        result.plane_pairs = planes.len();
        result.delta_trace.push(delta);
        if delta < params.convergence_epsilon {
            result.converged = true;
            break;
        }
    }

    result.pose = pose;
    result.final_rmse = rms(&match_points(map_a, map_b, &pose, params.max_point_pair_distance));
    Ok(result)
}
