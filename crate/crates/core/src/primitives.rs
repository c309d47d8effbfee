//! Geometric primitives and paired observations of them.

use serde::{Deserialize, Serialize};

use crate::error::{AlignError, Result};
use crate::geometry::{Pose, UnitVec3, Vec3};

/// Infinite line through `anchor` with unit `director`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub anchor: Vec3,
    pub director: UnitVec3,
}

impl Line {
    pub fn new(anchor: Vec3, director: Vec3) -> Self {
        Self {
            anchor,
            director: UnitVec3::new_normalize(director),
        }
    }

    pub fn closest_point(&self, p: &Vec3) -> Vec3 {
        let d = self.director.into_inner();
        self.anchor + d * (p - self.anchor).dot(&d)
    }
}

/// Plane through `centroid` with unit `normal`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Plane {
    pub centroid: Vec3,
    pub normal: UnitVec3,
}

impl Plane {
    pub fn new(centroid: Vec3, normal: Vec3) -> Self {
        Self {
            centroid,
            normal: UnitVec3::new_normalize(normal),
        }
    }

    pub fn signed_distance(&self, p: &Vec3) -> f64 {
        self.normal.dot(&(p - self.centroid))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GeoPrimitive {
    Point(Vec3),
    Line(Line),
    Plane(Plane),
}

/// Applies a rigid transform: positions get `R p + t`, directions only `R v`.
pub fn transform_primitive(pose: &Pose, p: &GeoPrimitive) -> GeoPrimitive {
    match p {
        GeoPrimitive::Point(x) => GeoPrimitive::Point(pose.transform_point(x)),
        GeoPrimitive::Line(l) => GeoPrimitive::Line(transform_line(pose, l)),
        GeoPrimitive::Plane(pl) => GeoPrimitive::Plane(transform_plane(pose, pl)),
    }
}

pub fn transform_line(pose: &Pose, l: &Line) -> Line {
    Line {
        anchor: pose.transform_point(&l.anchor),
        director: UnitVec3::new_unchecked(pose.rotate(&l.director)),
    }
}

pub fn transform_plane(pose: &Pose, p: &Plane) -> Plane {
    Plane {
        centroid: pose.transform_point(&p.centroid),
        normal: UnitVec3::new_unchecked(pose.rotate(&p.normal)),
    }
}

/// Orients a line director consistently as seen from `viewpoint`.
///
/// The director is flipped when it points away from the ray that joins the
/// viewpoint with the line anchor. When that ray is perpendicular to the line
/// (within 1e-12 in cosine) the director is kept as given. The anchor is
/// transformed together with the line, so two observations of the same
/// anchored line from rigidly related viewpoints get the same orientation.
pub fn canonicalize_line_direction(line: &Line, viewpoint: &Vec3) -> Result<Line> {
    let off_line = viewpoint - line.closest_point(viewpoint);
    let ray = line.anchor - viewpoint;
    let scale = ray.norm().max(1.0);
    if off_line.norm() <= 1e-12 * scale {
        return Err(AlignError::DegenerateViewpoint);
    }
    let cos = line.director.dot(&ray) / ray.norm();
    if cos < -1e-12 {
        Ok(Line {
            anchor: line.anchor,
            director: -line.director,
        })
    } else {
        Ok(*line)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointPair {
    pub a: Vec3,
    pub b: Vec3,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinePair {
    pub a: Line,
    pub b: Line,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanePair {
    pub a: Plane,
    pub b: Plane,
    pub weight: f64,
}

/// Point of frame `b` lying on a plane observed in frame `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointPlanePair {
    pub plane_a: Plane,
    pub point_b: Vec3,
    pub weight: f64,
}

/// Multipliers applied to every pair weight of a kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KindWeights {
    pub points: f64,
    pub lines: f64,
    pub planes: f64,
}

impl Default for KindWeights {
    fn default() -> Self {
        Self {
            points: 1.0,
            lines: 1.0,
            planes: 1.0,
        }
    }
}

/// Index-aligned correspondences between frame `a` (reference) and frame `b`.
///
/// Solvers estimate the pose that maps `b` observations onto `a`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PairingSet {
    pub points: Vec<PointPair>,
    pub lines: Vec<LinePair>,
    pub planes: Vec<PlanePair>,
    /// Only consumed by the Gauss-Newton solver.
    #[serde(default)]
    pub point_planes: Vec<PointPlanePair>,
    #[serde(default)]
    pub kind_weights: KindWeights,
}

impl PairingSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push_point(&mut self, a: Vec3, b: Vec3, weight: f64) {
        self.points.push(PointPair { a, b, weight });
    }

    pub fn push_line(&mut self, a: Line, b: Line, weight: f64) {
        self.lines.push(LinePair { a, b, weight });
    }

    pub fn push_plane(&mut self, a: Plane, b: Plane, weight: f64) {
        self.planes.push(PlanePair { a, b, weight });
    }

    pub fn push_point_plane(&mut self, plane_a: Plane, point_b: Vec3, weight: f64) {
        self.point_planes.push(PointPlanePair {
            plane_a,
            point_b,
            weight,
        });
    }

    pub fn len(&self) -> usize {
        self.points.len() + self.lines.len() + self.planes.len() + self.point_planes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Checks that every weight, including the per-kind multipliers, is
    /// finite and strictly positive.
    pub fn validate_weights(&self) -> Result<()> {
        let k = &self.kind_weights;
        let all = [k.points, k.lines, k.planes]
            .into_iter()
            .chain(self.points.iter().map(|p| p.weight))
            .chain(self.lines.iter().map(|p| p.weight))
            .chain(self.planes.iter().map(|p| p.weight))
            .chain(self.point_planes.iter().map(|p| p.weight));
        for w in all {
            if !(w.is_finite() && w > 0.0) {
                return Err(AlignError::InvalidWeight(w));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::UnitQuaternion;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn identity_leaves_primitives_unchanged() {
        let id = Pose::identity();
        let prims = [
            GeoPrimitive::Point(Vec3::new(1.0, 2.0, 3.0)),
            GeoPrimitive::Line(Line::new(Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 1.0))),
            GeoPrimitive::Plane(Plane::new(Vec3::new(0.0, 5.0, 0.0), Vec3::z())),
        ];
        for p in &prims {
            assert_eq!(transform_primitive(&id, p), *p);
        }
    }

    #[test]
    fn translation_moves_plane_centroid_only() {
        let t = Vec3::new(1.0, -2.0, 4.0);
        let pl = Plane::new(Vec3::new(3.0, 3.0, 3.0), Vec3::new(1.0, 1.0, 0.0));
        let GeoPrimitive::Plane(out) =
            transform_primitive(&Pose::from_translation(t), &GeoPrimitive::Plane(pl))
        else {
            panic!("kind changed");
        };
        assert_eq!(out.centroid, pl.centroid + t);
        assert_eq!(out.normal, pl.normal);
    }

    #[test]
    fn quarter_turn_rotates_director() {
        let pose = Pose::from_rotation(UnitQuaternion::from_axis_angle(&Vec3::z_axis(), FRAC_PI_2));
        let l = Line::new(Vec3::zeros(), Vec3::x());
        let out = transform_line(&pose, &l);
        // Rz(90) * (1,0,0) = (0,1,0)
        assert!((out.director.into_inner() - Vec3::y()).amax() < 1e-15);
        assert!((out.director.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn line_canonicalization_follows_anchor_ray() {
        let viewpoint = Vec3::new(1.0, 0.0, -3.0);
        let up = Line::new(Vec3::zeros(), Vec3::z());
        let down = Line::new(Vec3::zeros(), -Vec3::z());
        let cu = canonicalize_line_direction(&up, &viewpoint).unwrap();
        let cd = canonicalize_line_direction(&down, &viewpoint).unwrap();
        // ray = anchor - viewpoint = (-1, 0, 3): positive z component.
        assert_eq!(cu.director.into_inner(), Vec3::z());
        assert_eq!(cd, cu);
    }

    #[test]
    fn line_canonicalization_keeps_perpendicular_ties() {
        let l = Line::new(Vec3::zeros(), -Vec3::z());
        let out = canonicalize_line_direction(&l, &Vec3::new(2.0, 0.0, 0.0)).unwrap();
        assert_eq!(out, l);
    }

    #[test]
    fn viewpoint_on_line_is_rejected() {
        let l = Line::new(Vec3::new(0.0, 0.0, 1.0), Vec3::z());
        assert_eq!(
            canonicalize_line_direction(&l, &Vec3::new(0.0, 0.0, 7.0)),
            Err(AlignError::DegenerateViewpoint)
        );
    }

    #[test]
    fn rejects_non_positive_weights() {
        let mut set = PairingSet::new();
        set.push_point(Vec3::zeros(), Vec3::zeros(), 0.0);
        assert_eq!(set.validate_weights(), Err(AlignError::InvalidWeight(0.0)));
    }
}
