//! Sweeps over one-parameter families of clouds `t -> X_t`.
//!
//! Reports per-fiber thinness, the thinness of the stacked cloud
//! `union_t X_t x {t}` (one dimension up), and a box-dimension estimate of
//! the fibers closest to `t = 0` as a proxy for the limit set.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{box_dimension, thinness_score, PointCloud, ThinError, ThinnessReport};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberReport {
    pub t: f64,
    pub z: f64,
    pub thin: bool,
    pub report: ThinnessReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitEstimate {
    /// Fibers with `t` at or below this value (the lower quartile) are used.
    pub t_cutoff: f64,
    pub fibers_used: usize,
    /// One representative (cell mean) per occupied `delta`-cell.
    pub representatives: usize,
    pub scales: Vec<f64>,
    pub box_dimension: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyReport {
    pub fibers: Vec<FiberReport>,
    pub stacked: ThinnessReport,
    pub limit: LimitEstimate,
}

/// Sweep a family given as `(t, X_t)` pairs. Every fiber is scored in `k`
/// dimensions and judged against `z_of_t(t)`; the stacked cloud is scored
/// in `k + 1` dimensions.
pub fn family_sweep(
    family: &[(f64, PointCloud)],
    k: usize,
    delta: f64,
    n_projections: usize,
    seed: u64,
    z_of_t: impl Fn(f64) -> f64,
) -> Result<FamilyReport, ThinError> {
    let Some((_, first)) = family.first() else {
        return Err(ThinError::TooFew { what: "fibers", needed: 1 });
    };
    let d = first.dim();
    let mut ts: Vec<f64> = Vec::with_capacity(family.len());
    for (t, x) in family {
        if x.dim() != d {
            return Err(ThinError::DimensionMismatch { expected: d, got: x.dim() });
        }
        if ts.contains(t) {
            return Err(ThinError::RepeatedParameter(*t));
        }
        ts.push(*t);
    }

    let fibers = family
        .iter()
        .map(|(t, x)| {
            let report = thinness_score(x, k, delta, n_projections, seed)?;
            let z = z_of_t(*t);
            Ok(FiberReport { t: *t, z, thin: report.verdict(z), report })
        })
        .collect::<Result<Vec<_>, ThinError>>()?;

    let mut stacked_cloud = PointCloud::new(d + 1);
    for (t, x) in family {
        for p in x.lifted(*t) {
            stacked_cloud.push(p)?;
        }
    }
    let stacked = thinness_score(&stacked_cloud, k + 1, delta, n_projections, seed)?;

    let mut sorted = ts.clone();
    sorted.sort_by(f64::total_cmp);
    let t_cutoff = sorted[(sorted.len() - 1) / 4];
    let low: Vec<&PointCloud> = family.iter().filter(|(t, _)| *t <= t_cutoff).map(|(_, x)| x).collect();

    let mut cells: BTreeMap<Vec<i64>, (Vec<f64>, usize)> = BTreeMap::new();
    for x in &low {
        for p in x.points() {
            let key = p.iter().map(|v| (v / delta).floor() as i64).collect();
            let e = cells.entry(key).or_insert_with(|| (vec![0.0; d], 0));
            e.0.iter_mut().zip(p).for_each(|(a, b)| *a += b);
            e.1 += 1;
        }
    }
    let reps = PointCloud::from_points(
        d,
        cells.into_values().map(|(s, c)| s.into_iter().map(|v| v / c as f64).collect()).collect(),
    )?;

    let (scales, dim) = if reps.len() <= 1 {
        (Vec::new(), 0.0)
    } else {
        let diam = bbox_diagonal(&reps);
        let mut scales: Vec<f64> = (2..=5).map(|j| diam / f64::powi(2.0, j)).filter(|s| *s >= delta).collect();
        if scales.len() < 2 {
            scales = vec![2.0 * delta, delta];
        }
        let dim = box_dimension(&reps, &scales)?;
        (scales, dim)
    };

    Ok(FamilyReport {
        fibers,
        stacked,
        limit: LimitEstimate {
            t_cutoff,
            fibers_used: low.len(),
            representatives: reps.len(),
            scales,
            box_dimension: dim,
        },
    })
}

fn bbox_diagonal(c: &PointCloud) -> f64 {
    let d = c.dim();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for p in c.points() {
        for j in 0..d {
            lo[j] = lo[j].min(p[j]);
            hi[j] = hi[j].max(p[j]);
        }
    }
    lo.iter().zip(&hi).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt()
}
