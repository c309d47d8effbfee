//! Seeded synthetic scenes: features uniform in a cube observed from two
//! frames related by a random rigid motion.

use nalgebra::{Unit, UnitQuaternion};
use primalign::{Line, PairingSet, Plane, Pose, Vec3};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::config::{BenchConfig, OutlierMode};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub points: usize,
    pub lines: usize,
    pub planes: usize,
    pub sigma: f64,
    pub outlier_ratio: f64,
    pub outlier_mode: OutlierMode,
    pub cube_side: f64,
    pub direction_sigma_scale: f64,
}

impl SceneSpec {
    pub fn from_config(cfg: &BenchConfig, sigma: f64, outlier_ratio: f64) -> Self {
        Self {
            points: cfg.points,
            lines: cfg.lines,
            planes: cfg.planes,
            sigma,
            outlier_ratio,
            outlier_mode: cfg.outlier_mode,
            cube_side: cfg.cube_side,
            direction_sigma_scale: cfg.direction_sigma_scale,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub pairings: PairingSet,
    /// Maps frame `b` onto frame `a`.
    pub gt: Pose,
    /// Indices of the replaced point pairs, ascending.
    pub outlier_indices: Vec<usize>,
}

/// Seed of trial `trial` of a run seeded with `base`. Independent of the
/// sweep point, so every sigma/ratio sees the same poses and unit noise draws.
pub fn trial_seed(base: u64, trial: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(trial as u64);
    rng.next_u64()
}

pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    loop {
        let v = Vec3::from_fn(|_, _| rng.sample(StandardNormal));
        let n = v.norm();
        if n > 1e-6 {
            return v / n;
        }
    }
}

/// Uniformly distributed rotation (normalized 4-D Gaussian).
pub fn uniform_rotation<R: Rng + ?Sized>(rng: &mut R) -> UnitQuaternion<f64> {
    loop {
        let q = nalgebra::Quaternion::new(
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        );
        if q.norm() > 1e-6 {
            return UnitQuaternion::from_quaternion(q);
        }
    }
}

pub fn cube_point<R: Rng + ?Sized>(rng: &mut R, side: f64) -> Vec3 {
    Vec3::from_fn(|_, _| rng.random_range(0.0..side))
}

/// Rotation about a uniform axis by `|N(0, sigma)|` radians.
fn direction_noise<R: Rng + ?Sized>(rng: &mut R, sigma: f64) -> UnitQuaternion<f64> {
    let axis = Unit::new_unchecked(unit_vector(rng));
    let angle: f64 = if sigma > 0.0 {
        Normal::new(0.0, sigma).expect("finite sigma").sample(rng)
    } else {
        0.0
    };
    UnitQuaternion::from_axis_angle(&axis, angle.abs())
}

/// Ground truth moved by a rotation of exactly `degrees` about a random axis
/// and a translation of length `distance` in a random direction.
pub fn perturb_pose<R: Rng + ?Sized>(rng: &mut R, gt: &Pose, degrees: f64, distance: f64) -> Pose {
    let axis = Unit::new_unchecked(unit_vector(rng));
    let dq = UnitQuaternion::from_axis_angle(&axis, degrees.to_radians());
    Pose::new(dq * gt.rotation, gt.translation + unit_vector(rng) * distance)
}

pub fn gen_synthetic_scene(spec: &SceneSpec, seed: u64) -> Scene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let side = spec.cube_side;
    let gt = Pose::new(uniform_rotation(&mut rng), cube_point(&mut rng, side));
    let inv = gt.inverse();
    let dir_sigma = spec.sigma * spec.direction_sigma_scale;
    let noise = |rng: &mut ChaCha8Rng| -> Vec3 {
        Vec3::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal)) * spec.sigma
    };

    let mut pairings = PairingSet::new();
    for _ in 0..spec.points {
        let a = cube_point(&mut rng, side);
        let b = inv.transform_point(&a) + noise(&mut rng);
        pairings.push_point(a, b, 1.0);
    }
    for _ in 0..spec.lines {
        let a = Line::new(cube_point(&mut rng, side), unit_vector(&mut rng));
        let dir = direction_noise(&mut rng, dir_sigma) * inv.rotate(&a.director);
        let b = Line::new(inv.transform_point(&a.anchor) + noise(&mut rng), dir);
        pairings.push_line(a, b, 1.0);
    }
    for _ in 0..spec.planes {
        let a = Plane::new(cube_point(&mut rng, side), unit_vector(&mut rng));
        let normal = direction_noise(&mut rng, dir_sigma) * inv.rotate(&a.normal);
        let b = Plane::new(inv.transform_point(&a.centroid) + noise(&mut rng), normal);
        pairings.push_plane(a, b, 1.0);
    }

    let n = spec.points;
    let k = (spec.outlier_ratio * n as f64).floor() as usize;
    let mut outlier_indices = rand::seq::index::sample(&mut rng, n, k.min(n)).into_vec();
    outlier_indices.sort_unstable();
    let diameter = side * 3f64.sqrt();
    for &i in &outlier_indices {
        let p = &mut pairings.points[i];
        p.b = match spec.outlier_mode {
            OutlierMode::Cube => cube_point(&mut rng, side),
            OutlierMode::Far => p.b + unit_vector(&mut rng) * (5.0 * diameter),
        };
    }

    Scene {
        pairings,
        gt,
        outlier_indices,
    }
}
