mod common;

use nalgebra::UnitQuaternion;
use primalign::icp::{match_planes, match_points};
use primalign::kdtree::KdTree;
use primalign::{icp_align, robust_weight, IcpParams, Method, MetricMap, Plane, Pose, SolverConfig, Vec3};
use proptest::prelude::*;
use rand::Rng;

fn brute_force_nearest(points: &[Vec3], q: &Vec3) -> (usize, f64) {
    let mut best = (usize::MAX, f64::INFINITY);
    for (i, p) in points.iter().enumerate() {
        let d = (p.x - q.x) * (p.x - q.x) + (p.y - q.y) * (p.y - q.y) + (p.z - q.z) * (p.z - q.z);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

#[test]
fn kdtree_equals_brute_force() {
    let mut rng = common::rng(21);
    for round in 0..5 {
        let mut pts: Vec<Vec3> = (0..1000).map(|_| common::cube_point(&mut rng)).collect();
        if round == 4 {
            // Integer lattice: many exact ties.
            pts.iter_mut().for_each(|p| *p = p.map(|c| (c / 10.0).floor()));
        }
        let tree = KdTree::new(&pts);
        for _ in 0..1000 {
            let q = common::cube_point(&mut rng).map(|c| if round == 4 { (c / 10.0).floor() + 0.5 } else { c });
            assert_eq!(tree.nearest(&q).unwrap(), brute_force_nearest(&pts, &q));
        }
        for p in &pts {
            assert_eq!(tree.nearest(p).unwrap(), brute_force_nearest(&pts, p));
        }
    }
}

#[test]
fn point_matching_equals_brute_force() {
    let mut rng = common::rng(22);
    let a: Vec<Vec3> = (0..1000).map(|_| common::cube_point(&mut rng)).collect();
    let b: Vec<Vec3> = (0..1000).map(|_| common::cube_point(&mut rng)).collect();
    let pose = Pose::new(UnitQuaternion::from_euler_angles(0.1, -0.05, 0.2), Vec3::new(1.0, 0.5, -2.0));
    let (ma, mb) = (MetricMap::from_points(a.clone()), MetricMap::from_points(b.clone()));
    let got = match_points(&ma, &mb, &pose, 3.0);
    let mut want = vec![];
    for (j, pb) in b.iter().enumerate() {
        let (i, d2) = brute_force_nearest(&a, &pose.transform_point(pb));
        if d2 <= 9.0 {
            want.push((i, j));
        }
    }
    assert_eq!(got.iter().map(|m| (m.a_index, m.b_index)).collect::<Vec<_>>(), want);
    assert!(!want.is_empty());
}

#[test]
fn self_matching_pairs_each_point_with_itself() {
    let mut rng = common::rng(23);
    let map = MetricMap::from_points((0..500).map(|_| common::cube_point(&mut rng)).collect());
    let m = match_points(&map, &map, &Pose::identity(), 1e-9);
    assert_eq!(m.len(), 500);
    assert!(m.iter().all(|m| m.a_index == m.b_index && m.distance == 0.0));
}

#[test]
fn plane_matching_equals_brute_force() {
    let mut rng = common::rng(24);
    let planes = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<Plane> {
        (0..200).map(|_| Plane::new(common::cube_point(rng), common::unit_vector(rng))).collect()
    };
    let (pa, pb) = (planes(&mut rng), planes(&mut rng));
    let pose = Pose::new(UnitQuaternion::from_euler_angles(0.3, 0.0, -0.1), Vec3::new(2.0, 0.0, 1.0));
    let ma = MetricMap::new(vec![], vec![], pa.clone());
    let mb = MetricMap::new(vec![], vec![], pb.clone());
    let got = match_planes(&ma, &mb, &pose, 1.0);
    let mut want = vec![];
    for (j, b) in pb.iter().enumerate() {
        let c = pose.transform_point(&b.centroid);
        let i = (0..pa.len())
            .min_by(|&x, &y| (pa[x].centroid - c).norm().total_cmp(&(pa[y].centroid - c).norm()))
            .unwrap();
        let angle = pa[i].normal.angle(&pose.rotate(&b.normal));
        if angle <= 1.0 {
            want.push((i, j));
        }
    }
    assert_eq!(got.iter().map(|m| (m.a_index, m.b_index)).collect::<Vec<_>>(), want);

    let same = match_planes(&ma, &ma, &Pose::identity(), 0.01);
    assert_eq!(same.len(), pa.len());
    assert!(same.iter().all(|m| m.a_index == m.b_index && m.angle < 1e-7));
}

proptest! {
    #[test]
    fn robust_weight_is_bounded_and_decreasing(r1 in 0.0f64..1e3, r2 in 0.0f64..1e3, delta in 1e-3f64..1e2) {
        let (lo, hi) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
        let (wl, wh) = (robust_weight(lo, delta).unwrap(), robust_weight(hi, delta).unwrap());
        prop_assert!(wl >= wh);
        prop_assert!(wh > 0.0 && wl <= 1.0);
        if hi > 0.0 {
            prop_assert!(wh < 1.0);
        }
    }
}

fn blob(rng: &mut impl Rng, n: usize) -> MetricMap {
    // Points on an ellipsoid with a bump, unequal axes so the pose is observable.
    MetricMap::from_points(
        (0..n)
            .map(|_| {
                let u = common::unit_vector(rng);
                let r = 1.0 + 0.3 * (3.0 * u.x).sin() * u.y;
                Vec3::new(3.0 * u.x, 2.0 * u.y, 1.2 * u.z) * r
            })
            .collect(),
    )
}

#[test]
fn self_alignment_converges_immediately() {
    let mut rng = common::rng(25);
    let map = blob(&mut rng, 300);
    for method in Method::ALL {
        let params = IcpParams::new(SolverConfig::new(method), 1.0);
        let res = icp_align(&map, &map, &Pose::identity(), &params).unwrap();
        assert!(res.converged);
        assert_eq!(res.iterations, 1);
        assert!(res.pose.errors_to(&Pose::identity()).0 < 1e-12);
    }
}

#[test]
fn small_perturbations_converge_with_decreasing_residuals() {
    let mut rng = common::rng(26);
    let map_a = blob(&mut rng, 400);
    for method in Method::ALL {
        for _ in 0..5 {
            let gt = Pose::new(
                UnitQuaternion::from_scaled_axis(common::unit_vector(&mut rng) * 0.15),
                common::unit_vector(&mut rng) * 0.3,
            );
            let map_b = map_a.transformed(&gt.inverse());
            let mut params = IcpParams::new(SolverConfig::new(method), 10.0);
            params.max_iterations = 200;
            let res = icp_align(&map_a, &map_b, &Pose::identity(), &params).unwrap();
            let (r, t) = res.pose.errors_to(&gt);
            assert!(res.converged && r < 1e-6 && t < 1e-6, "{method}: {r:e} {t:e}");
            for w in res.mean_residual_trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-12, "{method}: residual went up {w:?}");
            }
            let again = icp_align(&map_a, &map_b, &Pose::identity(), &params).unwrap();
            assert_eq!(again, res);
        }
    }
}

#[test]
fn robust_icp_with_planes() {
    let mut rng = common::rng(27);
    let mut map_a = blob(&mut rng, 300);
    map_a.planes = (0..30).map(|_| Plane::new(common::cube_point(&mut rng) / 10.0, common::unit_vector(&mut rng))).collect();
    let gt = Pose::new(UnitQuaternion::from_euler_angles(0.05, 0.02, -0.04), Vec3::new(0.1, -0.05, 0.02));
    let map_b = map_a.transformed(&gt.inverse());
    let mut params = IcpParams::new(SolverConfig::new(Method::Olae), 10.0);
    params.robust_delta = Some(0.5);
    params.initial_guess_known = true;
    let res = icp_align(&map_a, &map_b, &Pose::identity(), &params).unwrap();
    assert!(res.plane_pairs > 0);
    let (r, t) = res.pose.errors_to(&gt);
    assert!(r < 1e-6 && t < 1e-6, "{r:e} {t:e}");
}

#[test]
fn no_overlap_reports_missing_correspondences() {
    let a = MetricMap::from_points(vec![Vec3::zeros(), Vec3::x(), Vec3::y()]);
    let b = MetricMap::from_points(vec![Vec3::repeat(100.0); 3]);
    let params = IcpParams::new(SolverConfig::new(Method::Horn), 1.0);
    let err = icp_align(&a, &b, &Pose::identity(), &params).unwrap_err();
    assert!(matches!(err, primalign::AlignError::NoCorrespondences { iteration: 1, found: 0, .. }));
}
