use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use primalign::{icp_align, IcpParams, Method, SolverConfig};
use primalign_bench::experiments::ModelSource;
use primalign_bench::{
    gen_synthetic_scene, load_ply, run, run_icp_benchmark, summarize, write_csv, write_ply, BenchConfig,
    BenchError, BenchRecord, Experiment, PlyEncoding, SceneSpec,
};
use serde_json::json;

#[derive(Parser)]
#[command(name = "primalign", version, about = "Benchmarks and one-shot alignment for primalign")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Error vs. noise sigma for each solver.
    BenchNoise(BenchArgs),
    /// Scale-test outlier rejection vs. unfiltered solving.
    BenchOutliers(BenchArgs),
    /// Robust-loss solving from a perturbed guess vs. plain Horn.
    BenchRobust(BenchArgs),
    /// ICP self-registration of a PLY model.
    BenchIcp(IcpArgs),
    /// Align two PLY point clouds with ICP and print the pose as JSON.
    Solve(SolveArgs),
    /// Write a synthetic scene (JSON plus one PLY per frame).
    Gen(GenArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverChoice {
    Horn,
    Olae,
    Gn,
    All,
}

impl SolverChoice {
    fn methods(self) -> Vec<Method> {
        match self {
            Self::Horn => vec![Method::Horn],
            Self::Olae => vec![Method::Olae],
            Self::Gn => vec![Method::GaussNewton],
            Self::All => Method::ALL.to_vec(),
        }
    }
}

#[derive(Args)]
struct BenchArgs {
    /// JSON file with any subset of the configuration fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, value_enum)]
    solver: Option<SolverChoice>,
    /// Comma-separated noise levels.
    #[arg(long, value_delimiter = ',')]
    sigma: Option<Vec<f64>>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    planes: Option<usize>,
    #[arg(long)]
    lines: Option<usize>,
    /// Comma-separated fractions of point pairs to replace by outliers.
    #[arg(long, value_delimiter = ',')]
    outlier_ratio: Option<Vec<f64>>,
    #[arg(long)]
    st: Option<f64>,
    #[arg(long)]
    robust_delta: Option<f64>,
    /// CSV destination; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl BenchArgs {
    fn config(&self, experiment: Experiment) -> Result<BenchConfig, BenchError> {
        let mut cfg = match &self.config {
            Some(path) => BenchConfig::from_json_file(experiment, path)?,
            None => BenchConfig::for_experiment(experiment),
        };
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.trials {
            cfg.trials = v;
        }
        if let Some(v) = self.solver {
            cfg.solvers = v.methods();
        }
        if let Some(v) = &self.sigma {
            cfg.sigmas = v.clone();
        }
        if let Some(v) = self.points {
            cfg.points = v;
        }
        if let Some(v) = self.planes {
            cfg.planes = v;
        }
        if let Some(v) = self.lines {
            cfg.lines = v;
        }
        if let Some(v) = &self.outlier_ratio {
            cfg.outlier_ratios = v.clone();
        }
        if let Some(v) = self.st {
            cfg.s_t = v;
        }
        if let Some(v) = self.robust_delta {
            cfg.robust_delta = v;
        }
        if let Some(v) = &self.out {
            cfg.output = Some(v.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct IcpArgs {
    #[command(flatten)]
    bench: BenchArgs,
    /// PLY model; a built-in shape is used when absent.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Fail instead of using the built-in shape.
    #[arg(long)]
    no_fallback: bool,
    #[arg(long)]
    icp_points: Option<usize>,
    #[arg(long)]
    max_pair_distance: Option<f64>,
}

#[derive(Args)]
struct SolveArgs {
    /// Reference cloud.
    a: PathBuf,
    /// Cloud to align onto the reference.
    b: PathBuf,
    #[arg(long, value_enum, default_value = "olae")]
    solver: SolverChoice,
    /// Defaults to the largest bounding-box side of the reference.
    #[arg(long)]
    max_pair_distance: Option<f64>,
    #[arg(long, default_value_t = 100)]
    max_iterations: usize,
    #[arg(long)]
    st: Option<f64>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    planes: Option<usize>,
    #[arg(long)]
    lines: Option<usize>,
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0.0)]
    outlier_ratio: f64,
    /// Output directory for scene.json, a.ply and b.ply.
    #[arg(long)]
    out: PathBuf,
}

fn emit(records: &[BenchRecord], out: Option<&Path>) -> Result<(), BenchError> {
    match out {
        Some(path) => write_csv(fs::File::create(path)?, records)?,
        None => write_csv(io::stdout().lock(), records)?,
    }
    eprintln!(
        "{:<14} {:>7} {:>7} {:>6} {:>6} {:>12} {:>12} {:>11} {:>9}",
        "solver", "sigma", "ratio", "runs", "failed", "med rot", "med trans", "med cpu", "detected"
    );
    for s in summarize(records) {
        eprintln!(
            "{:<14} {:>7} {:>7} {:>6} {:>6} {:>12.3e} {:>12.3e} {:>11.3e} {:>4}/{:<4}",
            s.solver,
            s.sigma,
            s.outlier_ratio,
            s.runs,
            s.failed,
            s.median_rotation_error,
            s.median_translation_error,
            s.median_cpu_time,
            s.outliers_detected,
            s.outliers_injected
        );
    }
    Ok(())
}

fn bench(args: &BenchArgs, experiment: Experiment) -> Result<(), BenchError> {
    let cfg = args.config(experiment)?;
    emit(&run(&cfg)?, cfg.output.as_deref())
}

fn bench_icp(args: &IcpArgs) -> Result<(), BenchError> {
    let mut cfg = args.bench.config(Experiment::Icp)?;
    if let Some(m) = &args.model {
        cfg.model = Some(m.clone());
    }
    if args.no_fallback {
        cfg.allow_fallback = false;
    }
    if let Some(n) = args.icp_points {
        cfg.icp_points = n;
    }
    if let Some(d) = args.max_pair_distance {
        cfg.icp_max_pair_distance = Some(d);
    }
    let (records, source) = run_icp_benchmark(&cfg)?;
    if source == ModelSource::Fallback {
        eprintln!("warning: no model file found, using the built-in shape (rows labelled icp-fallback)");
    }
    emit(&records, cfg.output.as_deref())
}

fn solve(args: &SolveArgs) -> Result<(), BenchError> {
    let a = load_ply(&args.a)?;
    let b = load_ply(&args.b)?;
    let method = match args.solver {
        SolverChoice::Horn => Method::Horn,
        SolverChoice::Olae => Method::Olae,
        SolverChoice::Gn => Method::GaussNewton,
        SolverChoice::All => return Err(BenchError::InvalidConfig("solve needs a single solver".into())),
    };
    let max_dist = args.max_pair_distance.unwrap_or_else(|| a.bbox_max_side());
    let mut params = IcpParams::new(SolverConfig::new(method).with_outlier_threshold(args.st), max_dist);
    params.max_iterations = args.max_iterations;
    let res = icp_align(&a, &b, &primalign::Pose::identity(), &params)?;
    let q = res.pose.rotation.quaternion();
    let t = res.pose.translation;
    let out = json!({
        "solver": method.name(),
        "rotation_wxyz": [q.w, q.i, q.j, q.k],
        "translation": [t.x, t.y, t.z],
        "iterations": res.iterations,
        "converged": res.converged,
        "point_pairs": res.point_pairs,
        "final_rmse": res.final_rmse,
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn gen(args: &GenArgs) -> Result<(), BenchError> {
    let mut cfg = match &args.config {
        Some(path) => BenchConfig::from_json_file(Experiment::Noise, path)?,
        None => BenchConfig::for_experiment(Experiment::Noise),
    };
    cfg.points = args.points.unwrap_or(cfg.points);
    cfg.planes = args.planes.unwrap_or(cfg.planes);
    cfg.lines = args.lines.unwrap_or(cfg.lines);
    cfg.sigmas = vec![args.sigma];
    cfg.outlier_ratios = vec![args.outlier_ratio];
    cfg.validate()?;
    let scene = gen_synthetic_scene(&SceneSpec::from_config(&cfg, args.sigma, args.outlier_ratio), args.seed);
    fs::create_dir_all(&args.out)?;
    fs::write(args.out.join("scene.json"), serde_json::to_string_pretty(&scene)?)?;
    let a: Vec<_> = scene.pairings.points.iter().map(|p| p.a).collect();
    let b: Vec<_> = scene.pairings.points.iter().map(|p| p.b).collect();
    write_ply(&args.out.join("a.ply"), &a, PlyEncoding::Ascii)?;
    write_ply(&args.out.join("b.ply"), &b, PlyEncoding::Ascii)?;
    eprintln!("wrote scene.json, a.ply and b.ply to {}", args.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::BenchNoise(a) => bench(a, Experiment::Noise),
        Command::BenchOutliers(a) => bench(a, Experiment::Outliers),
        Command::BenchRobust(a) => bench(a, Experiment::Robust),
        Command::BenchIcp(a) => bench_icp(a),
        Command::Solve(a) => solve(a),
        Command::Gen(a) => gen(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
