use thiserror::Error;

/// Errors raised by the unification, solver and ICP layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlignError {
    #[error("at least one point-to-point pairing is required")]
    EmptyPointSet,

    #[error("threshold must be strictly positive, got {0}")]
    InvalidThreshold(f64),

    #[error("pair weights must be finite and strictly positive, got {0}")]
    InvalidWeight(f64),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("viewpoint lies on the line; direction cannot be canonicalized")]
    DegenerateViewpoint,

    #[error("{0} pairings are only supported by the Gauss-Newton solver")]
    UnsupportedPairing(&'static str),

    #[error("normal equations are singular (condition estimate {condition:e})")]
    SingularHessian { condition: f64 },

    #[error("iteration {iteration}: only {found} correspondences, need at least {required}")]
    NoCorrespondences {
        iteration: usize,
        found: usize,
        required: usize,
    },

    #[error("iteration {iteration}: {source}")]
    Solver {
        iteration: usize,
        #[source]
        source: Box<AlignError>,
    },
}

pub type Result<T> = std::result::Result<T, AlignError>;
