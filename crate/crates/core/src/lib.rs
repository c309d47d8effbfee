//! Rigid registration of point, line and plane observations.
//!
//! Heterogeneous pairings are first unified into paired vector lists
//! ([`unify`]): points contribute centroid-relative vectors, lines their
//! directors and planes their normals. Any vector-based rotation solver can
//! then estimate the rotation, and the translation follows from the point
//! centroids. Three solvers are provided:
//!
//! - [`horn`]: Horn's optimal quaternion (dominant eigenvector of a 4x4
//!   symmetric matrix).
//! - [`olae`]: the Optimal Linear Attitude Estimator, a 3x3 linear system in
//!   the Gibbs vector, with half-turn pre-rotations to avoid its singularity.
//! - [`gn`]: an iterative Gauss-Newton baseline over SE(3).
//!
//! [`icp`] wraps any of them into an iterative closest point/primitive loop.
//!
//! ```
//! use nalgebra::UnitQuaternion;
//! use primalign::{solve_olae, PairingSet, Pose, Vec3};
//!
//! let gt = Pose::new(UnitQuaternion::from_euler_angles(0.1, 0.2, 0.3), Vec3::new(1.0, 2.0, 3.0));
//! let mut set = PairingSet::new();
//! for b in [Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 2.0, 0.0), Vec3::new(0.0, 0.0, 3.0)] {
//!     set.push_point(gt.transform_point(&b), b, 1.0);
//! }
//! let est = solve_olae(&set, None).unwrap().pose;
//! let (rot_err, trans_err) = est.errors_to(&gt);
//! assert!(rot_err < 1e-12 && trans_err < 1e-12);
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod geometry;
pub mod gn;
pub mod horn;
pub mod icp;
pub mod kdtree;
pub mod olae;
pub mod primitives;
pub mod solver;
pub mod unify;

pub use error::{AlignError, Result};
pub use geometry::{
    quat_from_gibbs, rotation_error, se3_exp, se3_log, GibbsVector, Pose, UnitVec3, Vec3, Vec6,
};
pub use gn::{solve_gn, GnOptions};
pub use horn::solve_horn;
pub use icp::{icp_align, robust_weight, IcpParams, IcpResult, MetricMap};
pub use olae::{solve_olae, solve_olae_with, OlaeOptions, RotationAxis};
pub use primitives::{
    transform_primitive, GeoPrimitive, KindWeights, Line, PairingSet, Plane, PointPair,
};
pub use solver::{Diagnostics, Method, SolverConfig, SolverResult};
pub use unify::{build_horn_vectors, build_olae_unit_vectors, UnifiedVectors};
