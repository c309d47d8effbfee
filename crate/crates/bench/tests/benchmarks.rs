use primalign::{Method, Vec3};
use primalign_bench::experiments::{icp_perturbation, load_model};
use primalign_bench::{
    median, run_icp_benchmark, run_noise_benchmark, run_outlier_benchmark, run_robust_benchmark, BenchConfig,
    BenchError, BenchRecord, Experiment, OutlierMode,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small(experiment: Experiment) -> BenchConfig {
    BenchConfig {
        trials: 20,
        ..BenchConfig::for_experiment(experiment)
    }
}

fn without_timing(mut records: Vec<BenchRecord>) -> Vec<BenchRecord> {
    for r in &mut records {
        r.cpu_time = 0.0;
    }
    records
}

fn median_rot(records: &[BenchRecord], solver: &str, ratio: f64) -> f64 {
    median(
        &records
            .iter()
            .filter(|r| r.solver == solver && r.outlier_ratio == ratio)
            .filter_map(|r| r.rotation_error)
            .collect::<Vec<_>>(),
    )
}

#[test]
fn row_count_is_trials_times_solvers_times_sweep() {
    let cfg = BenchConfig {
        sigmas: vec![0.0, 0.5],
        outlier_ratios: vec![0.0, 0.1, 0.2],
        ..small(Experiment::Noise)
    };
    let records = run_noise_benchmark(&cfg).unwrap();
    assert_eq!(records.len(), 20 * 3 * 6);
    // Sweep point, then trial, then solver.
    assert_eq!(records[0].solver, "horn");
    assert_eq!(records[1].solver, "olae");
    assert_eq!(records[3].trial, 1);
    assert_eq!(records[3 * 20].outlier_ratio, 0.1);
}

#[test]
fn benchmarks_are_deterministic_under_seed() {
    let noise = BenchConfig {
        sigmas: vec![0.5],
        planes: 10,
        ..small(Experiment::Noise)
    };
    let a = without_timing(run_noise_benchmark(&noise).unwrap());
    assert_eq!(a, without_timing(run_noise_benchmark(&noise).unwrap()));
    assert!(a.iter().all(|r| r.rotation_error.unwrap() > 0.0));
    let other_seed = BenchConfig { seed: 1, ..noise };
    assert_ne!(a, without_timing(run_noise_benchmark(&other_seed).unwrap()));

    let robust = small(Experiment::Robust);
    assert_eq!(
        without_timing(run_robust_benchmark(&robust).unwrap()),
        without_timing(run_robust_benchmark(&robust).unwrap())
    );
}

#[test]
fn failures_are_recorded_not_dropped() {
    // Two point pairs give two antiparallel centroid vectors: degenerate.
    let cfg = BenchConfig {
        points: 2,
        sigmas: vec![0.0],
        solvers: vec![Method::Horn, Method::Olae],
        ..small(Experiment::Noise)
    };
    let records = run_noise_benchmark(&cfg).unwrap();
    assert_eq!(records.len(), 40);
    assert!(records.iter().all(|r| !r.is_ok() && r.status.starts_with("failed:")));
}

#[test]
fn no_injected_outliers_means_none_detected() {
    let cfg = BenchConfig {
        outlier_ratios: vec![0.0],
        ..small(Experiment::Outliers)
    };
    let records = run_outlier_benchmark(&cfg).unwrap();
    assert!(records.iter().all(|r| r.outliers_injected == 0 && r.outliers_detected == 0 && r.inliers_rejected == 0));
}

#[test]
fn far_outliers_are_all_detected() {
    let cfg = BenchConfig {
        outlier_ratios: vec![0.1, 0.3],
        outlier_mode: OutlierMode::Far,
        ..small(Experiment::Outliers)
    };
    let records = run_outlier_benchmark(&cfg).unwrap();
    let filtered: Vec<_> = records.iter().filter(|r| r.solver.ends_with("+st")).collect();
    assert!(!filtered.is_empty());
    for r in filtered {
        assert!(r.outliers_injected > 0);
        assert_eq!(r.outliers_detected, r.outliers_injected, "{r:?}");
    }
}

#[test]
fn outlier_benchmark_labels() {
    let records = run_outlier_benchmark(&small(Experiment::Outliers)).unwrap();
    let mut labels: Vec<&str> = records.iter().map(|r| r.solver.as_str()).collect();
    labels.sort_unstable();
    labels.dedup();
    assert_eq!(labels, ["gn", "horn", "horn+st", "olae+st"]);
}

#[test]
fn filtering_helps_at_low_outlier_ratios() {
    let cfg = BenchConfig {
        outlier_ratios: vec![0.1, 0.2],
        trials: 200,
        ..BenchConfig::for_experiment(Experiment::Outliers)
    };
    let records = run_outlier_benchmark(&cfg).unwrap();
    for ratio in [0.1, 0.2] {
        let plain = median_rot(&records, "horn", ratio);
        for filtered in ["horn+st", "olae+st"] {
            assert!(median_rot(&records, filtered, ratio) <= plain, "{filtered} at {ratio}");
        }
    }
}

#[test]
fn robust_beats_plain_horn_from_heavy_outlier_ratios() {
    let cfg = BenchConfig {
        outlier_ratios: vec![0.2, 0.3, 0.5],
        trials: 200,
        solvers: vec![Method::Olae],
        ..BenchConfig::for_experiment(Experiment::Robust)
    };
    let records = run_robust_benchmark(&cfg).unwrap();
    for ratio in [0.2, 0.3, 0.5] {
        assert!(median_rot(&records, "olae+robust", ratio) <= median_rot(&records, "horn", ratio));
    }
}

#[test]
fn robust_on_clean_data_matches_plain() {
    let cfg = BenchConfig {
        sigmas: vec![0.0],
        outlier_ratios: vec![0.0],
        ..small(Experiment::Robust)
    };
    for r in run_robust_benchmark(&cfg).unwrap() {
        assert!(r.rotation_error.unwrap() < 1e-9, "{r:?}");
    }
}

#[test]
fn icp_zero_perturbation_converges_in_one_iteration() {
    let cfg = BenchConfig {
        trials: 2,
        icp_translation_fraction: 0.0,
        icp_rotation_deg: 0.0,
        ..BenchConfig::for_experiment(Experiment::Icp)
    };
    let (records, _) = run_icp_benchmark(&cfg).unwrap();
    assert_eq!(records.len(), 6);
    for r in records {
        assert_eq!(r.iterations, 1, "{r:?}");
        assert_eq!(r.status, "ok");
    }
}

#[test]
fn icp_perturbations_stay_in_protocol_ranges() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let b = 2.0;
    let mut extremes = Vec3::zeros();
    for _ in 0..2000 {
        let p = icp_perturbation(&mut rng, b, 0.25, 20.0);
        assert!(p.translation.amax() <= 0.25 * b);
        let (roll, pitch, yaw) = p.rotation.euler_angles();
        for a in [roll, pitch, yaw] {
            assert!(a.abs() <= 20f64.to_radians() + 1e-12);
        }
        extremes = extremes.sup(&p.translation.abs());
    }
    // The whole range is used, not just a corner of it.
    assert!(extremes.min() > 0.24 * b);
}

#[test]
fn missing_model_without_fallback_is_an_error() {
    let cfg = BenchConfig {
        model: Some("/nonexistent/bunny.ply".into()),
        allow_fallback: false,
        ..BenchConfig::for_experiment(Experiment::Icp)
    };
    assert!(matches!(load_model(&cfg), Err(BenchError::MissingModel(_))));
    let with_fallback = BenchConfig {
        allow_fallback: true,
        ..cfg
    };
    assert!(load_model(&with_fallback).is_ok());
}
