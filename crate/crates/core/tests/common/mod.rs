#![allow(dead_code)]

use nalgebra::UnitQuaternion;
use primalign::{PairingSet, Plane, Pose, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn unit_vector(rng: &mut impl Rng) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

/// Uniform rotation from a normalized 4-D Gaussian.
pub fn random_rotation(rng: &mut impl Rng) -> UnitQuaternion<f64> {
    let q = nalgebra::Quaternion::new(
        gaussian(rng),
        gaussian(rng),
        gaussian(rng),
        gaussian(rng),
    );
    UnitQuaternion::new_normalize(q)
}

fn gaussian(rng: &mut impl Rng) -> f64 {
    // Box-Muller, enough for test fixtures.
    let u1: f64 = rng.random_range(f64::EPSILON..1.0);
    let u2: f64 = rng.random_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn cube_point(rng: &mut impl Rng) -> Vec3 {
    Vec3::new(
        rng.random_range(0.0..50.0),
        rng.random_range(0.0..50.0),
        rng.random_range(0.0..50.0),
    )
}

pub fn random_pose(rng: &mut impl Rng) -> Pose {
    Pose::new(random_rotation(rng), cube_point(rng))
}

/// Noise-free pairings: `a = gt(b)`.
pub fn exact_scene(rng: &mut impl Rng, gt: &Pose, points: usize, planes: usize) -> PairingSet {
    let mut set = PairingSet::new();
    for _ in 0..points {
        let b = cube_point(rng);
        set.push_point(gt.transform_point(&b), b, 1.0);
    }
    for _ in 0..planes {
        let b = Plane::new(cube_point(rng), unit_vector(rng));
        set.push_plane(primalign::primitives::transform_plane(gt, &b), b, 1.0);
    }
    set
}
