//! Synthetic and model-based benchmarks for the `primalign` solvers.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiments;
pub mod ply;
pub mod record;
pub mod scene;
pub mod shapes;

pub use config::{BenchConfig, Experiment, OutlierMode};
pub use error::{BenchError, Result};
pub use experiments::{
    run, run_icp_benchmark, run_noise_benchmark, run_outlier_benchmark, run_robust_benchmark, ModelSource,
};
pub use ply::{downsample, load_ply, write_ply, PlyEncoding};
pub use record::{median, summarize, write_csv, BenchRecord};
pub use scene::{gen_synthetic_scene, Scene, SceneSpec};
