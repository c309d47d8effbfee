//! Conversion of point, line and plane pairings into paired vector lists.
//!
//! Points become centroid-relative vectors, lines their unit directors and
//! planes their unit normals. The rotation solvers then only see vectors.
//! For the unit-vector variant the centroid-relative point vectors are
//! normalized as well.

use crate::error::{AlignError, Result};
use crate::geometry::Vec3;
use crate::primitives::{PairingSet, PointPair};

/// Centroid-relative vectors shorter than this carry no direction and are
/// left out of the vector lists.
pub const MIN_POINT_VECTOR_NORM: f64 = 1e-9;

const PARALLEL_TOLERANCE: f64 = 1e-9;

/// Paired vectors ready for a rotation solver.
#[derive(Debug, Clone, PartialEq)]
pub struct UnifiedVectors {
    pub va: Vec<Vec3>,
    pub vb: Vec<Vec3>,
    /// Normalized to sum 1.
    pub weights: Vec<f64>,
    /// The first `point_vectors` entries come from point pairs.
    pub point_vectors: usize,
    pub centroid_a: Vec3,
    pub centroid_b: Vec3,
    /// Indices into `PairingSet::points` kept after outlier rejection.
    pub inlier_point_indices: Vec<usize>,
    pub outlier_point_indices: Vec<usize>,
}

impl UnifiedVectors {
    pub fn len(&self) -> usize {
        self.va.len()
    }

    pub fn is_empty(&self) -> bool {
        self.va.is_empty()
    }
}

/// Weighted centroids of the `a` and `b` sides.
pub fn weighted_centroids(points: &[PointPair]) -> Result<(Vec3, Vec3)> {
    centroids_of(points.iter())
}

fn centroids_of<'a>(points: impl Iterator<Item = &'a PointPair>) -> Result<(Vec3, Vec3)> {
    let mut sum_w = 0.0;
    let mut ca = Vec3::zeros();
    let mut cb = Vec3::zeros();
    for p in points {
        sum_w += p.weight;
        ca += p.a * p.weight;
        cb += p.b * p.weight;
    }
    if sum_w <= 0.0 {
        return Err(AlignError::EmptyPointSet);
    }
    Ok((ca / sum_w, cb / sum_w))
}

/// Indices of point pairs whose centroid-relative norms disagree by a ratio
/// of at least `1 + s_t`. Pairs with a near-zero norm on either side are
/// flagged too, since the ratio is undefined.
pub fn detect_scale_outliers(
    points: &[PointPair],
    centroids: (Vec3, Vec3),
    s_t: f64,
) -> Result<Vec<usize>> {
    if !(s_t > 0.0) {
        return Err(AlignError::InvalidThreshold(s_t));
    }
    let (ca, cb) = centroids;
    Ok(points
        .iter()
        .enumerate()
        .filter(|(_, p)| {
            let na = (p.a - ca).norm();
            let nb = (p.b - cb).norm();
            let (lo, hi) = if na < nb { (na, nb) } else { (nb, na) };
            lo < MIN_POINT_VECTOR_NORM || hi / lo - 1.0 >= s_t
        })
        .map(|(i, _)| i)
        .collect())
}

/// Vectors for Horn's method: point vectors keep their length.
pub fn build_horn_vectors(pairings: &PairingSet, s_t: Option<f64>) -> Result<UnifiedVectors> {
    build(pairings, s_t, false)
}

/// Unit vectors for attitude estimators: point vectors are normalized.
pub fn build_olae_unit_vectors(pairings: &PairingSet, s_t: Option<f64>) -> Result<UnifiedVectors> {
    build(pairings, s_t, true)
}

fn build(pairings: &PairingSet, s_t: Option<f64>, unit: bool) -> Result<UnifiedVectors> {
    if !pairings.point_planes.is_empty() {
        return Err(AlignError::UnsupportedPairing("point-to-plane"));
    }
    pairings.validate_weights()?;
    let points = &pairings.points;
    if points.is_empty() {
        return Err(AlignError::EmptyPointSet);
    }

    let mut centroids = weighted_centroids(points)?;
    let mut outliers = Vec::new();
    // A lone point pair always sits on its own centroid; there is no scale to test.
    if let (Some(s_t), true) = (s_t, points.len() > 1) {
        outliers = detect_scale_outliers(points, centroids, s_t)?;
    } else if let Some(s_t) = s_t {
        if !(s_t > 0.0) {
            return Err(AlignError::InvalidThreshold(s_t));
        }
    }
    let inliers: Vec<usize> = if outliers.is_empty() {
        (0..points.len()).collect()
    } else {
        let mut flagged = outliers.iter().copied().peekable();
        let kept: Vec<usize> = (0..points.len())
            .filter(|i| {
                if flagged.peek() == Some(i) {
                    flagged.next();
                    false
                } else {
                    true
                }
            })
            .collect();
        if kept.is_empty() {
            return Err(AlignError::EmptyPointSet);
        }
        centroids = centroids_of(kept.iter().map(|&i| &points[i]))?;
        kept
    };
    let (ca, cb) = centroids;

    let n = inliers.len() + pairings.lines.len() + pairings.planes.len();
    let mut va = Vec::with_capacity(n);
    let mut vb = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);

    let kw = pairings.kind_weights;
    for &i in &inliers {
        let p = &points[i];
        let a = p.a - ca;
        let b = p.b - cb;
        let (na, nb) = (a.norm(), b.norm());
        if na < MIN_POINT_VECTOR_NORM || nb < MIN_POINT_VECTOR_NORM {
            continue;
        }
        if unit {
            va.push(a / na);
            vb.push(b / nb);
        } else {
            va.push(a);
            vb.push(b);
        }
        weights.push(p.weight * kw.points);
    }
    let point_vectors = va.len();
    for l in &pairings.lines {
        va.push(l.a.director.into_inner());
        vb.push(l.b.director.into_inner());
        weights.push(l.weight * kw.lines);
    }
    for p in &pairings.planes {
        va.push(p.a.normal.into_inner());
        vb.push(p.b.normal.into_inner());
        weights.push(p.weight * kw.planes);
    }

    if !spans_two_directions(&va) || !spans_two_directions(&vb) {
        return Err(AlignError::DegenerateGeometry(format!(
            "{} vector pairs do not span two independent directions",
            va.len()
        )));
    }

    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);

    Ok(UnifiedVectors {
        va,
        vb,
        weights,
        point_vectors,
        centroid_a: ca,
        centroid_b: cb,
        inlier_point_indices: inliers,
        outlier_point_indices: outliers,
    })
}

fn spans_two_directions(vs: &[Vec3]) -> bool {
    let Some(first) = vs.iter().find(|v| v.norm() > 0.0) else {
        return false;
    };
    let u = first.normalize();
    vs.iter()
        .any(|v| v.norm() > 0.0 && u.cross(&(v / v.norm())).norm() > PARALLEL_TOLERANCE)
}
