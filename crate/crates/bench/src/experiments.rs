//! The four benchmark protocols. Trials run on the rayon pool; records come
//! back in sweep-point, trial, solver order regardless of scheduling.

use std::path::PathBuf;
use std::time::Instant;

use nalgebra::UnitQuaternion;
use primalign::gn::GnOptions;
use primalign::icp::{icp_align, IcpParams, MetricMap};
use primalign::{robust_weight, solve_gn, Method, PairingSet, Pose, SolverConfig, SolverResult, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{BenchConfig, Experiment};
use crate::error::{BenchError, Result};
use crate::ply::{downsample, load_ply};
use crate::record::{BenchRecord, TrialKey, STATUS_NOT_CONVERGED, STATUS_OK};
use crate::scene::{gen_synthetic_scene, perturb_pose, trial_seed, Scene, SceneSpec};
use crate::shapes::bunny_like;

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64())
}

/// Generator for the per-trial randomness that is not part of the scene
/// (initial-guess perturbations).
fn aux_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

fn run_synthetic<F>(cfg: &BenchConfig, per_trial: F) -> Result<Vec<BenchRecord>>
where
    F: Fn(TrialKey<'_>, &Scene, &mut ChaCha8Rng) -> Vec<BenchRecord> + Sync,
{
    cfg.validate()?;
    let experiment = cfg.experiment.to_string();
    let jobs: Vec<(f64, f64, usize)> = cfg
        .sigmas
        .iter()
        .flat_map(|&s| cfg.outlier_ratios.iter().map(move |&r| (s, r)))
        .flat_map(|(s, r)| (0..cfg.trials).map(move |t| (s, r, t)))
        .collect();
    let per_job: Vec<Vec<BenchRecord>> = jobs
        .par_iter()
        .map(|&(sigma, ratio, trial)| {
            let seed = trial_seed(cfg.seed, trial);
            let scene = gen_synthetic_scene(&SceneSpec::from_config(cfg, sigma, ratio), seed);
            let key = TrialKey {
                experiment: &experiment,
                sigma,
                outlier_ratio: ratio,
                trial,
            };
            per_trial(key, &scene, &mut aux_rng(seed))
        })
        .collect();
    Ok(per_job.into_iter().flatten().collect())
}

fn gn_options() -> GnOptions {
    GnOptions::default()
}

fn solve_once(
    method: Method,
    s_t: Option<f64>,
    pairings: &PairingSet,
    initial: &Pose,
) -> (primalign::Result<SolverResult>, f64) {
    let solver = SolverConfig {
        method,
        s_t,
        gn: gn_options(),
    };
    timed(|| solver.solve(pairings, initial))
}

/// Error vs. noise level for every configured solver. Gauss-Newton starts
/// from ground truth perturbed by the configured initial-guess offset; the
/// closed-form solvers need no initial guess.
pub fn run_noise_benchmark(cfg: &BenchConfig) -> Result<Vec<BenchRecord>> {
    run_synthetic(cfg, |key, scene, rng| {
        let initial = perturb_pose(rng, &scene.gt, cfg.initial_rotation_deg, cfg.initial_translation);
        cfg.solvers
            .iter()
            .map(|&m| {
                let (out, t) = solve_once(m, None, &scene.pairings, &initial);
                BenchRecord::from_solve(key, m.name(), scene, &out, t)
            })
            .collect()
    })
}

/// Scale-test filtering against unfiltered solving. Horn and OLAE run with
/// the `s_t` test (`<name>+st`), Gauss-Newton has no filter, and unfiltered
/// Horn is always added as the baseline.
pub fn run_outlier_benchmark(cfg: &BenchConfig) -> Result<Vec<BenchRecord>> {
    let mut variants: Vec<(Method, Option<f64>, String)> = cfg
        .solvers
        .iter()
        .map(|&m| match m {
            Method::GaussNewton => (m, None, m.name().to_string()),
            _ => (m, Some(cfg.s_t), format!("{m}+st")),
        })
        .collect();
    if !variants.iter().any(|(m, s, _)| *m == Method::Horn && s.is_none()) {
        variants.push((Method::Horn, None, "horn".into()));
    }
    run_synthetic(cfg, |key, scene, rng| {
        let initial = perturb_pose(rng, &scene.gt, cfg.initial_rotation_deg, cfg.initial_translation);
        variants
            .iter()
            .map(|(m, s_t, label)| {
                let (out, t) = solve_once(*m, *s_t, &scene.pairings, &initial);
                BenchRecord::from_solve(key, label, scene, &out, t)
            })
            .collect()
    })
}

/// Pair weights from the Geman-McClure loss of the residuals at `pose`.
pub fn robust_reweight(pairings: &PairingSet, pose: &Pose, delta: f64) -> primalign::Result<PairingSet> {
    let mut out = pairings.clone();
    for p in &mut out.points {
        p.weight *= robust_weight((p.a - pose.transform_point(&p.b)).norm(), delta)?;
    }
    for l in &mut out.lines {
        l.weight *= robust_weight((l.a.director.into_inner() - pose.rotate(&l.b.director)).norm(), delta)?;
    }
    for p in &mut out.planes {
        p.weight *= robust_weight((p.a.normal.into_inner() - pose.rotate(&p.b.normal)).norm(), delta)?;
    }
    Ok(out)
}

/// Iteratively reweighted closed-form solve: weights from the current pose,
/// solve, repeat `rounds` times.
pub fn solve_robust(
    method: Method,
    pairings: &PairingSet,
    initial: &Pose,
    delta: f64,
    rounds: usize,
) -> primalign::Result<SolverResult> {
    if method == Method::GaussNewton {
        let opts = GnOptions {
            robust_delta: Some(delta),
            ..gn_options()
        };
        return solve_gn(pairings, initial, &opts);
    }
    let solver = SolverConfig::new(method);
    let mut pose = *initial;
    let mut last = None;
    for _ in 0..rounds.max(1) {
        let res = solver.solve(&robust_reweight(pairings, &pose, delta)?, &pose)?;
        pose = res.pose;
        last = Some(res);
    }
    let mut res = last.expect("at least one round");
    res.diagnostics.iterations = rounds.max(1);
    Ok(res)
}

/// Robust-loss solving from a perturbed ground-truth guess (`<name>+robust`)
/// against plain Horn.
pub fn run_robust_benchmark(cfg: &BenchConfig) -> Result<Vec<BenchRecord>> {
    run_synthetic(cfg, |key, scene, rng| {
        let initial = perturb_pose(rng, &scene.gt, cfg.initial_rotation_deg, cfg.initial_translation);
        let mut recs: Vec<BenchRecord> = cfg
            .solvers
            .iter()
            .map(|&m| {
                let (out, t) = timed(|| {
                    solve_robust(m, &scene.pairings, &initial, cfg.robust_delta, cfg.robust_iterations)
                });
                BenchRecord::from_solve(key, &format!("{m}+robust"), scene, &out, t)
            })
            .collect();
        let (out, t) = solve_once(Method::Horn, None, &scene.pairings, &initial);
        recs.push(BenchRecord::from_solve(key, "horn", scene, &out, t));
        recs
    })
}

/// Where the ICP model came from.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSource {
    File(PathBuf),
    Fallback,
}

pub const FALLBACK_SAMPLES: usize = 20_000;

/// Loads the configured model, or the built-in shape when allowed.
pub fn load_model(cfg: &BenchConfig) -> Result<(MetricMap, ModelSource)> {
    match &cfg.model {
        Some(path) if path.exists() => Ok((load_ply(path)?, ModelSource::File(path.clone()))),
        missing if !cfg.allow_fallback => Err(BenchError::MissingModel(
            missing.clone().unwrap_or_else(|| PathBuf::from("<none>")),
        )),
        _ => Ok((
            MetricMap::from_points(bunny_like(FALLBACK_SAMPLES, cfg.seed)),
            ModelSource::Fallback,
        )),
    }
}

/// Random pose of the ICP protocol: translation uniform in `[-f b, f b]` per
/// axis and roll/pitch/yaw uniform in `[-deg, deg]`.
pub fn icp_perturbation<R: Rng + ?Sized>(rng: &mut R, b: f64, fraction: f64, degrees: f64) -> Pose {
    let t = fraction * b;
    let a = degrees.to_radians();
    let translation = Vec3::from_fn(|_, _| rng.random_range(-t..=t));
    let (roll, pitch, yaw) = (rng.random_range(-a..=a), rng.random_range(-a..=a), rng.random_range(-a..=a));
    Pose::new(UnitQuaternion::from_euler_angles(roll, pitch, yaw), translation)
}

/// Self-registration of a downsampled model against a randomly moved copy.
/// Returns the records and where the model came from; fallback runs are
/// labelled `icp-fallback`.
pub fn run_icp_benchmark(cfg: &BenchConfig) -> Result<(Vec<BenchRecord>, ModelSource)> {
    cfg.validate()?;
    let (model, source) = load_model(cfg)?;
    if model.points.len() < 3 {
        return Err(BenchError::InvalidConfig("model has fewer than 3 vertices".into()));
    }
    let map_a = downsample(&model, cfg.icp_points, cfg.seed);
    let b = map_a.bbox_max_side();
    let experiment = match source {
        ModelSource::File(_) => Experiment::Icp.to_string(),
        ModelSource::Fallback => "icp-fallback".to_string(),
    };
    let max_dist = cfg.icp_max_pair_distance.unwrap_or(b);

    let per_trial: Vec<Vec<BenchRecord>> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(cfg.seed, trial));
            let gt = icp_perturbation(&mut rng, b, cfg.icp_translation_fraction, cfg.icp_rotation_deg);
            let map_b = map_a.transformed(&gt.inverse());
            let key = TrialKey {
                experiment: &experiment,
                sigma: 0.0,
                outlier_ratio: 0.0,
                trial,
            };
            cfg.solvers
                .iter()
                .map(|&m| {
                    let mut params = IcpParams::new(SolverConfig::new(m), max_dist);
                    params.max_iterations = cfg.icp_max_iterations;
                    // Fresh index per run so its construction is timed too.
                    let a = MetricMap::from_points(map_a.points.clone());
                    let (out, t) = timed(|| icp_align(&a, &map_b, &Pose::identity(), &params));
                    match out {
                        Ok(res) => {
                            let (rot, trans) = res.pose.errors_to(&gt);
                            let mut rec = BenchRecord::failed(key, m.name(), 0, t, String::new());
                            rec.rotation_error = Some(rot);
                            rec.translation_error = Some(trans);
                            rec.iterations = res.iterations;
                            rec.status = if res.converged { STATUS_OK } else { STATUS_NOT_CONVERGED }.into();
                            rec
                        }
                        Err(e) => BenchRecord::failed(key, m.name(), 0, t, format!("failed: {e}")),
                    }
                })
                .collect()
        })
        .collect();
    Ok((per_trial.into_iter().flatten().collect(), source))
}

/// Runs the benchmark selected by `cfg.experiment`.
pub fn run(cfg: &BenchConfig) -> Result<Vec<BenchRecord>> {
    match cfg.experiment {
        Experiment::Noise => run_noise_benchmark(cfg),
        Experiment::Outliers => run_outlier_benchmark(cfg),
        Experiment::Robust => run_robust_benchmark(cfg),
        Experiment::Icp => run_icp_benchmark(cfg).map(|(r, _)| r),
    }
}
