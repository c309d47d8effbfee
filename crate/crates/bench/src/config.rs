use std::fmt;
use std::path::{Path, PathBuf};

use primalign::Method;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Noise,
    Outliers,
    Robust,
    Icp,
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Noise => "noise",
            Self::Outliers => "outliers",
            Self::Robust => "robust",
            Self::Icp => "icp",
        })
    }
}

/// How replaced point pairs are redrawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutlierMode {
    /// The `b` point is redrawn uniformly in the cube.
    Cube,
    /// The `b` point is pushed 5 scene diameters away in a random direction.
    Far,
}

/// Every tunable of a benchmark run. The JSON config file mirrors these
/// fields; command-line flags override it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub experiment: Experiment,
    pub points: usize,
    pub lines: usize,
    pub planes: usize,
    /// Point noise standard deviation, in metres.
    pub sigmas: Vec<f64>,
    pub outlier_ratios: Vec<f64>,
    pub outlier_mode: OutlierMode,
    pub s_t: f64,
    pub robust_delta: f64,
    /// Reweight-and-solve rounds of the robust benchmark.
    pub robust_iterations: usize,
    pub trials: usize,
    pub seed: u64,
    pub solvers: Vec<Method>,
    pub output: Option<PathBuf>,
    /// Side of the cube the synthetic features are drawn in.
    pub cube_side: f64,
    /// Normal/director perturbation angles are `|N(0, sigma * scale)|` rad.
    /// The default makes sigma read as degrees for directions.
    pub direction_sigma_scale: f64,
    /// Size of the perturbation that turns ground truth into the initial
    /// guess handed to Gauss-Newton and to the robust benchmark.
    pub initial_rotation_deg: f64,
    pub initial_translation: f64,
    pub model: Option<PathBuf>,
    pub allow_fallback: bool,
    pub icp_points: usize,
    /// Defaults to the largest bounding-box side of the model.
    pub icp_max_pair_distance: Option<f64>,
    pub icp_max_iterations: usize,
    pub icp_translation_fraction: f64,
    pub icp_rotation_deg: f64,
}

impl BenchConfig {
    pub fn for_experiment(experiment: Experiment) -> Self {
        let base = Self {
            experiment,
            points: 100,
            lines: 0,
            planes: 0,
            sigmas: vec![0.0, 0.1, 0.5, 1.0, 2.5],
            outlier_ratios: vec![0.0],
            outlier_mode: OutlierMode::Cube,
            s_t: 0.2,
            robust_delta: 1.0,
            robust_iterations: 3,
            trials: 1000,
            seed: 0,
            solvers: Method::ALL.to_vec(),
            output: None,
            cube_side: 50.0,
            direction_sigma_scale: std::f64::consts::PI / 180.0,
            initial_rotation_deg: 10.0,
            initial_translation: 1.0,
            model: None,
            allow_fallback: true,
            icp_points: 1000,
            icp_max_pair_distance: None,
            icp_max_iterations: 200,
            icp_translation_fraction: 0.25,
            icp_rotation_deg: 20.0,
        };
        match experiment {
            Experiment::Noise => base,
            Experiment::Outliers => Self {
                sigmas: vec![0.0],
                outlier_ratios: vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5],
                ..base
            },
            Experiment::Robust => Self {
                sigmas: vec![0.1],
                outlier_ratios: vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5],
                initial_rotation_deg: 2.0,
                initial_translation: 0.5,
                ..base
            },
            Experiment::Icp => Self {
                sigmas: vec![0.0],
                trials: 10,
                ..base
            },
        }
    }

    /// Experiment defaults overlaid with the fields present in a JSON file.
    pub fn from_json_file(experiment: Experiment, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_overlay(experiment, &text)
    }

    pub fn from_json_overlay(experiment: Experiment, json: &str) -> Result<Self> {
        let overlay: Value = serde_json::from_str(json)?;
        let Value::Object(fields) = overlay else {
            return Err(BenchError::InvalidConfig("config file must hold a JSON object".into()));
        };
        let mut merged = serde_json::to_value(Self::for_experiment(experiment))?;
        let target = merged.as_object_mut().expect("config serializes to an object");
        for (k, v) in fields {
            target.insert(k, v);
        }
        let cfg: Self = serde_json::from_value(merged)?;
        if cfg.experiment != experiment {
            return Err(BenchError::InvalidConfig(format!(
                "config file is for experiment '{}', not '{experiment}'",
                cfg.experiment
            )));
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(BenchError::InvalidConfig(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.sigmas.is_empty() || self.outlier_ratios.is_empty() || self.solvers.is_empty() {
            return bad("sigma, outlier-ratio and solver lists must not be empty".into());
        }
        if let Some(s) = self.sigmas.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
            return bad(format!("sigma {s} must be finite and non-negative"));
        }
        if let Some(r) = self.outlier_ratios.iter().find(|r| !(0.0..1.0).contains(*r)) {
            return bad(format!("outlier ratio {r} must lie in [0, 1)"));
        }
        for (name, v) in [
            ("s_t", self.s_t),
            ("robust_delta", self.robust_delta),
            ("cube_side", self.cube_side),
            ("direction_sigma_scale", self.direction_sigma_scale),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if self.experiment == Experiment::Icp {
            if self.icp_points < 3 {
                return bad("icp_points must be at least 3".into());
            }
            if let Some(d) = self.icp_max_pair_distance.filter(|d| !(*d > 0.0)) {
                return bad(format!("icp_max_pair_distance must be positive, got {d}"));
            }
        } else if self.points + self.lines + self.planes == 0 {
            return bad("scene needs at least one feature".into());
        }
        Ok(())
    }
}
