//! Built-in stand-in model for the ICP benchmark when no PLY file is given.

use primalign::Vec3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::scene::unit_vector;

struct Blob {
    center: Vec3,
    radii: Vec3,
}

impl Blob {
    fn contains(&self, p: &Vec3) -> bool {
        (p - self.center).component_div(&self.radii).norm_squared() < 1.0
    }

    fn approx_area(&self) -> f64 {
        let r = self.radii;
        // Knud Thomsen's approximation.
        let p = 1.6075;
        let m = ((r.x * r.y).powf(p) + (r.x * r.z).powf(p) + (r.y * r.z).powf(p)) / 3.0;
        4.0 * std::f64::consts::PI * m.powf(1.0 / p)
    }
}

/// Surface samples of an asymmetric "sitting rabbit" made of ellipsoids
/// (body, head, two ears of different length, tail), about 0.2 units across.
///
/// Points inside another blob are discarded, so only the outer surface of the
/// union remains. Deterministic for a given `seed`.
pub fn bunny_like(samples: usize, seed: u64) -> Vec<Vec3> {
    let blobs = [
        Blob { center: Vec3::new(0.0, 0.0, 0.0), radii: Vec3::new(0.075, 0.055, 0.05) },
        Blob { center: Vec3::new(0.065, 0.005, 0.05), radii: Vec3::new(0.035, 0.03, 0.03) },
        Blob { center: Vec3::new(0.07, 0.018, 0.095), radii: Vec3::new(0.01, 0.007, 0.04) },
        Blob { center: Vec3::new(0.06, -0.015, 0.085), radii: Vec3::new(0.009, 0.007, 0.028) },
        Blob { center: Vec3::new(-0.078, 0.0, 0.012), radii: Vec3::new(0.015, 0.015, 0.015) },
        Blob { center: Vec3::new(0.045, 0.02, -0.045), radii: Vec3::new(0.03, 0.015, 0.012) },
    ];
    let total_area: f64 = blobs.iter().map(Blob::approx_area).sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(samples);
    for (k, blob) in blobs.iter().enumerate() {
        let n = (samples as f64 * blob.approx_area() / total_area).ceil() as usize;
        for _ in 0..n {
            let p = blob.center + unit_vector(&mut rng).component_mul(&blob.radii);
            let hidden = blobs.iter().enumerate().any(|(j, other)| j != k && other.contains(&p));
            if !hidden {
                out.push(p);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_sized() {
        let a = bunny_like(5000, 1);
        assert_eq!(a, bunny_like(5000, 1));
        assert!(a.len() > 3000 && a.len() <= 5010, "{}", a.len());
    }
}
