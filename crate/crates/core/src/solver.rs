use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::Pose;
use crate::gn::{solve_gn, GnOptions};
use crate::horn::solve_horn;
use crate::olae::{solve_olae, RotationAxis};
use crate::primitives::PairingSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Horn,
    Olae,
    #[serde(rename = "gn")]
    GaussNewton,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Horn, Method::Olae, Method::GaussNewton];

    pub fn name(self) -> &'static str {
        match self {
            Method::Horn => "horn",
            Method::Olae => "olae",
            Method::GaussNewton => "gn",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "horn" => Ok(Method::Horn),
            "olae" => Ok(Method::Olae),
            "gn" | "gauss-newton" | "gaussnewton" => Ok(Method::GaussNewton),
            other => Err(format!("unknown solver `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub method: Method,
    /// `|det|` of the unrotated and x/y/z pre-rotated OLAE systems.
    pub determinants: Option<[f64; 4]>,
    pub sequential_axis: Option<RotationAxis>,
    /// Zero for the closed-form solvers.
    pub iterations: usize,
    pub final_cost: Option<f64>,
    /// False only when an iterative solver hit its iteration cap.
    pub converged: bool,
}

impl Diagnostics {
    pub fn closed_form(method: Method) -> Self {
        Self {
            method,
            determinants: None,
            sequential_axis: None,
            iterations: 0,
            final_cost: None,
            converged: true,
        }
    }
}

/// Estimated pose mapping frame `b` onto frame `a`, plus diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverResult {
    pub pose: Pose,
    pub inlier_point_indices: Vec<usize>,
    pub outlier_point_indices: Vec<usize>,
    pub diagnostics: Diagnostics,
}

/// Solver selection shared by the ICP loop and the benchmarks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub method: Method,
    /// Scale-mismatch outlier threshold (closed-form solvers only).
    pub s_t: Option<f64>,
    pub gn: GnOptions,
}

impl SolverConfig {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            s_t: None,
            gn: GnOptions::default(),
        }
    }

    pub fn with_outlier_threshold(mut self, s_t: Option<f64>) -> Self {
        self.s_t = s_t;
        self
    }

    /// Solves one registration problem. `initial` only matters for
    /// Gauss-Newton.
    pub fn solve(&self, pairings: &PairingSet, initial: &Pose) -> Result<SolverResult> {
        match self.method {
            Method::Horn => solve_horn(pairings, self.s_t),
            Method::Olae => solve_olae(pairings, self.s_t),
            Method::GaussNewton => solve_gn(pairings, initial, &self.gn),
        }
    }
}
