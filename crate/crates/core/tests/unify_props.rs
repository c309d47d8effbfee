mod common;

use primalign::unify::{detect_scale_outliers, weighted_centroids};
use primalign::{build_horn_vectors, build_olae_unit_vectors, PairingSet, Vec3};
use proptest::prelude::*;
use rand::seq::SliceRandom;

/// 100 exact pairs plus 10 pairs whose `b` point is pushed five cloud
/// diameters away.
fn scene_with_gross_outliers(seed: u64) -> (PairingSet, Vec<usize>) {
    let mut rng = common::rng(seed);
    let gt = common::random_pose(&mut rng);
    let mut set = common::exact_scene(&mut rng, &gt, 110, 0);
    let diameter = 50.0 * 3f64.sqrt();
    let outliers: Vec<usize> = (100..110).collect();
    for &i in &outliers {
        set.points[i].b += common::unit_vector(&mut rng) * 5.0 * diameter;
    }
    (set, outliers)
}

/// Ratio test evaluated pair by pair, without the library code path.
fn brute_force_flags(set: &PairingSet, ca: Vec3, cb: Vec3, s_t: f64) -> Vec<usize> {
    let mut out = vec![];
    for (i, p) in set.points.iter().enumerate() {
        let na = ((p.a.x - ca.x).powi(2) + (p.a.y - ca.y).powi(2) + (p.a.z - ca.z).powi(2)).sqrt();
        let nb = ((p.b.x - cb.x).powi(2) + (p.b.y - cb.y).powi(2) + (p.b.z - cb.z).powi(2)).sqrt();
        if na.min(nb) < 1e-9 || na.max(nb) / na.min(nb) - 1.0 >= s_t {
            out.push(i);
        }
    }
    out
}

#[test]
fn gross_outliers_are_all_flagged() {
    for seed in 0..20 {
        let (set, outliers) = scene_with_gross_outliers(seed);
        let c = weighted_centroids(&set.points).unwrap();
        let flagged = detect_scale_outliers(&set.points, c, 0.2).unwrap();
        assert_eq!(flagged, brute_force_flags(&set, c.0, c.1, 0.2));
        for o in &outliers {
            assert!(flagged.contains(o), "seed {seed}: outlier {o} missed");
        }
        let uv = build_horn_vectors(&set, Some(0.2)).unwrap();
        assert!(outliers.iter().all(|o| !uv.inlier_point_indices.contains(o)));
        assert!(outliers.iter().all(|o| uv.outlier_point_indices.contains(o)));
    }
}

#[test]
fn exact_scenes_have_no_scale_outliers() {
    let mut rng = common::rng(5);
    for _ in 0..200 {
        let gt = common::random_pose(&mut rng);
        let set = common::exact_scene(&mut rng, &gt, 50, 0);
        let c = weighted_centroids(&set.points).unwrap();
        for s_t in [1e-6, 0.01, 0.2, 1.0] {
            assert!(detect_scale_outliers(&set.points, c, s_t).unwrap().is_empty());
        }
    }
}

#[test]
fn olae_mixed_scene_has_ten_unit_vectors() {
    let mut rng = common::rng(8);
    let gt = common::random_pose(&mut rng);
    let mut set = common::exact_scene(&mut rng, &gt, 5, 5);
    let uv = build_olae_unit_vectors(&set, None).unwrap();
    assert_eq!(uv.len(), 10);
    for v in uv.va.iter().chain(&uv.vb) {
        assert!((v.norm() - 1.0).abs() < 1e-12);
    }
    // Move one point onto the centroid of the other four, on both sides.
    let (ca, cb) = weighted_centroids(&set.points[..4]).unwrap();
    set.points[4].a = ca;
    set.points[4].b = cb;
    assert_eq!(build_olae_unit_vectors(&set, None).unwrap().len(), 9);
}

fn weighted_scene() -> impl Strategy<Value = (u64, Vec<f64>)> {
    (any::<u64>(), prop::collection::vec(0.1f64..10.0, 3..40))
}

proptest! {
    #[test]
    fn horn_point_vectors_sum_to_zero((seed, weights) in weighted_scene()) {
        let mut rng = common::rng(seed);
        let gt = common::random_pose(&mut rng);
        let mut set = common::exact_scene(&mut rng, &gt, weights.len(), 2);
        for (p, w) in set.points.iter_mut().zip(&weights) {
            p.weight = *w;
        }
        let uv = build_horn_vectors(&set, None).unwrap();
        let mut sum = Vec3::zeros();
        let mut scale = 0.0;
        for i in 0..uv.point_vectors {
            sum += uv.va[i] * uv.weights[i];
            scale += uv.va[i].norm() * uv.weights[i];
        }
        prop_assert!(sum.norm() <= 1e-9 * scale);
    }

    #[test]
    fn olae_vectors_are_unit((seed, weights) in weighted_scene()) {
        let mut rng = common::rng(seed);
        let gt = common::random_pose(&mut rng);
        let set = common::exact_scene(&mut rng, &gt, weights.len(), 3);
        let uv = build_olae_unit_vectors(&set, Some(0.2)).unwrap();
        for v in uv.va.iter().chain(&uv.vb) {
            prop_assert!((v.norm() - 1.0).abs() < 1e-12);
        }
        prop_assert!((uv.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn builders_ignore_storage_order(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let gt = common::random_pose(&mut rng);
        let set = common::exact_scene(&mut rng, &gt, 12, 6);
        let mut shuffled = set.clone();
        shuffled.points.shuffle(&mut rng);
        shuffled.planes.shuffle(&mut rng);
        for unit in [false, true] {
            let build = if unit { build_olae_unit_vectors } else { build_horn_vectors };
            let x = build(&set, None).unwrap();
            let y = build(&shuffled, None).unwrap();
            prop_assert!((x.centroid_a - y.centroid_a).amax() < 1e-12);
            let key = |v: &primalign::Vec3| (v.x * 1e6).round() as i64;
            let mut xs: Vec<_> = x.va.iter().zip(&x.vb).map(|(a, b)| (key(a), key(b))).collect();
            let mut ys: Vec<_> = y.va.iter().zip(&y.vb).map(|(a, b)| (key(a), key(b))).collect();
            xs.sort();
            ys.sort();
            prop_assert_eq!(xs, ys);
        }
    }

    #[test]
    fn flags_shrink_as_threshold_grows(seed in any::<u64>(), lo in 0.01f64..1.0, extra in 0.0f64..1.0) {
        let mut rng = common::rng(seed);
        let gt = common::random_pose(&mut rng);
        let mut set = common::exact_scene(&mut rng, &gt, 30, 0);
        for p in set.points.iter_mut().take(10) {
            p.b = common::cube_point(&mut rng);
        }
        let c = weighted_centroids(&set.points).unwrap();
        let small = detect_scale_outliers(&set.points, c, lo).unwrap();
        let large = detect_scale_outliers(&set.points, c, lo + extra).unwrap();
        prop_assert!(large.iter().all(|i| small.contains(i)));
    }
}
