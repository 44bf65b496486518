//! Thinness of finite point clouds and related metrics.
//!
//! A finite cloud contains no ball at all, so thinness is measured on its
//! `delta`-fattening: after a random orthogonal projection to `k`
//! dimensions, how large a ball fits inside the union of open
//! `delta`-balls around the projected points? The median over several
//! projections is the cloud's score, and the cloud is called empirically
//! `z`-thin when the score is below `z`.

mod boxdim;
mod cloud;
mod family;
mod projection;
mod score;

pub use boxdim::{box_counts, box_dimension};
pub use cloud::PointCloud;
pub use family::{family_sweep, FamilyReport, FiberReport, LimitEstimate};
pub use projection::random_projection;
pub use score::{inscribed_radius, thinness_score, CoverageStrategy, ThinnessReport};

#[derive(Debug, thiserror::Error)]
pub enum ThinError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite coordinate in point {index}")]
    NonFinite { index: usize },
    #[error("projection target dimension must satisfy 1 <= k <= n, got k = {k}, n = {n}")]
    BadTargetDimension { k: usize, n: usize },
    #[error("delta must be positive, got {0}")]
    NonPositiveDelta(f64),
    #[error("need at least {needed} {what}")]
    TooFew { what: &'static str, needed: usize },
    #[error("empty point cloud")]
    EmptyCloud,
    #[error("family parameters must be distinct (t = {0} repeated)")]
    RepeatedParameter(f64),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("bad csv value {value:?} in row {row}")]
    CsvValue { row: usize, value: String },
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Brute-force Hausdorff distance between two clouds of the same dimension.
///
/// Follows the convention that the distance is infinite when either cloud
/// is empty (the directed supremum over an empty infimum is unbounded).
pub fn hausdorff(x: &PointCloud, y: &PointCloud) -> Result<f64, ThinError> {
    if x.dim() != y.dim() {
        return Err(ThinError::DimensionMismatch { expected: x.dim(), got: y.dim() });
    }
    if x.is_empty() || y.is_empty() {
        return Ok(f64::INFINITY);
    }
    Ok(directed_hausdorff(x.points(), y.points()).max(directed_hausdorff(y.points(), x.points())))
}

/// `sup_{a in from} inf_{b in to} |a - b|`.
pub fn directed_hausdorff(from: &[Vec<f64>], to: &[Vec<f64>]) -> f64 {
    use rayon::prelude::*;
    from.par_iter()
        .map(|a| to.iter().map(|b| dist2(a, b)).fold(f64::INFINITY, f64::min))
        .reduce(|| 0.0, f64::max)
        .sqrt()
}

/// Distance from `x` to the nearest point of `cloud` (infinite if empty).
pub fn distance_to_cloud(x: &[f64], cloud: &PointCloud) -> f64 {
    cloud.points().iter().map(|p| dist2(x, p)).fold(f64::INFINITY, f64::min).sqrt()
}

/// Membership in the open `z`-neighbourhood `{x : d(x, Y) < z}`.
pub fn in_z_neighborhood(x: &[f64], y: &PointCloud, z: f64) -> bool {
    !y.is_empty() && distance_to_cloud(x, y) < z
}
