use std::collections::HashSet;

use super::{PointCloud, ThinError};

/// Number of occupied boxes of side `eps` for each scale.
pub fn box_counts(cloud: &PointCloud, scales: &[f64]) -> Vec<usize> {
    scales
        .iter()
        .map(|&eps| {
            cloud
                .points()
                .iter()
                .map(|p| p.iter().map(|v| (v / eps).floor() as i64).collect::<Vec<_>>())
                .collect::<HashSet<_>>()
                .len()
        })
        .collect()
}

/// Least-squares slope of `log N(eps)` against `log(1/eps)`.
///
/// A cloud with a single distinct point has dimension 0.
pub fn box_dimension(cloud: &PointCloud, scales: &[f64]) -> Result<f64, ThinError> {
    if scales.len() < 2 {
        return Err(ThinError::TooFew { what: "scales", needed: 2 });
    }
    if let Some(&bad) = scales.iter().find(|s| !(**s > 0.0)) {
        return Err(ThinError::NonPositiveDelta(bad));
    }
    if cloud.is_empty() {
        return Err(ThinError::EmptyCloud);
    }
    let first = &cloud.points()[0];
    if cloud.points().iter().all(|p| p == first) {
        return Ok(0.0);
    }
    let counts = box_counts(cloud, scales);
    let xs: Vec<f64> = scales.iter().map(|s| (1.0 / s).ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|&c| (c as f64).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(ThinError::TooFew { what: "distinct scales", needed: 2 });
    }
    Ok(sxy / sxx)
}
