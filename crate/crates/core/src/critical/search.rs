use rand::Rng;
use rayon::prelude::*;
use serde_json::json;

use super::cluster::build_clusters;
use super::nelder_mead::{self, NmOptions};
use super::{
    check_dims, default_cluster_eps, lex_cmp, nu_or_inf, witness, CriticalError, CriticalValueEstimate, Domain,
    EstimateKind, SearchBudget, Witness,
};
use crate::expr::PolynomialMap;
use crate::rng;
use crate::thin::PointCloud;

/// A point with its `nu`.
pub(crate) type Sample = (Vec<f64>, f64);

/// Everything a box search evaluated: samples and simplex visits with their
/// `nu`, plus the end point of every polishing run.
pub(crate) struct Exploration {
    pub visits: Vec<Sample>,
    pub minima: Vec<Sample>,
}

/// Grid plus random samples of the domain, then simplex polishing of `nu`
/// from the lowest, mutually spread-out samples. Independent of any
/// threshold, so callers filter the same exploration at several levels.
pub(crate) fn explore(
    map: &PolynomialMap,
    domain: &Domain,
    budget: &SearchBudget,
    tag: u64,
) -> Result<Exploration, CriticalError> {
    check_dims(map, Some(domain))?;
    budget.validate()?;
    let n = map.n();
    let bounds = domain.bounds();

    let mut samples = grid(bounds, budget.samples / 2);
    let random = budget.samples - samples.len();
    let batches = random.div_ceil(budget.batch_size);
    let drawn: Vec<Vec<Vec<f64>>> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut r = rng::stream(budget.seed, &[tag, 0, b as u64]);
            let count = budget.batch_size.min(random - b * budget.batch_size);
            (0..count).map(|_| bounds.iter().map(|[lo, hi]| r.random_range(*lo..*hi)).collect()).collect()
        })
        .collect();
    samples.extend(drawn.into_iter().flatten());
    samples.retain(|x| domain.contains(x));
    if samples.is_empty() {
        return Err(CriticalError::EmptyDomain);
    }

    let nus: Vec<f64> = samples.par_iter().map(|x| nu_or_inf(map, x)).collect();
    let spacing = domain.diameter() / (2.0 * (budget.starts.max(1) as f64).powf(1.0 / n as f64));
    let starts = select_starts(&samples, &nus, budget.starts, spacing);

    let step: Vec<f64> = domain.widths().iter().map(|w| 0.05 * w).collect();
    let opts = NmOptions { max_iters: budget.nm_iters, restarts: budget.restarts, ..NmOptions::default() };
    let runs: Vec<(Vec<Sample>, Sample)> = starts
        .par_iter()
        .map(|&s| {
            let mut seen = Vec::new();
            let objective = |x: &[f64]| if domain.contains(x) { nu_or_inf(map, x) } else { f64::INFINITY };
            let res = nelder_mead::minimize(objective, &samples[s], &step, &opts, |x, v| {
                if v.is_finite() {
                    seen.push((x.to_vec(), v));
                }
            });
            (seen, (res.x, res.value))
        })
        .collect();

    let mut visits: Vec<Sample> = samples.into_iter().zip(nus).filter(|(_, v)| v.is_finite()).collect();
    let mut minima = Vec::with_capacity(runs.len());
    for (seen, best) in runs {
        visits.extend(seen);
        if best.1.is_finite() {
            minima.push(best);
        }
    }
    Ok(Exploration { visits, minima })
}

/// Cell-centred grid with `m^n <= target` nodes.
fn grid(bounds: &[[f64; 2]], target: usize) -> Vec<Vec<f64>> {
    let n = bounds.len() as u32;
    if target == 0 {
        return Vec::new();
    }
    let mut m = 1usize;
    while (m + 1).checked_pow(n).is_some_and(|c| c <= target) {
        m += 1;
    }
    let total = m.pow(n);
    (0..total)
        .map(|mut idx| {
            bounds
                .iter()
                .map(|[lo, hi]| {
                    let i = idx % m;
                    idx /= m;
                    lo + (i as f64 + 0.5) * (hi - lo) / m as f64
                })
                .collect()
        })
        .collect()
}

/// Greedy pick of up to `count` indices in order of increasing value, each
/// at least `spacing` from those already picked; topped up with the next
/// lowest values if the spread pass runs short.
pub(crate) fn select_starts(points: &[Vec<f64>], values: &[f64], count: usize, spacing: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).filter(|&i| values[i].is_finite()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut picked: Vec<usize> = Vec::with_capacity(count);
    for &i in &order {
        if picked.len() == count {
            break;
        }
        let far = picked
            .iter()
            .all(|&j| points[i].iter().zip(&points[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() >= spacing);
        if far {
            picked.push(i);
        }
    }
    for &i in &order {
        if picked.len() == count {
            break;
        }
        if !picked.contains(&i) {
            picked.push(i);
        }
    }
    picked
}

fn sorted_unique(mut pts: Vec<Sample>) -> Vec<Sample> {
    pts.sort_by(|a, b| lex_cmp(&a.0, &b.0));
    pts.dedup_by(|a, b| a.0 == b.0);
    pts
}

/// Points of the domain with `nu < z`, each with its value and `nu`
/// (`scale` holds `z`). Sorted lexicographically by `x`.
pub fn z_critical_witnesses(
    map: &PolynomialMap,
    domain: &Domain,
    z: f64,
    budget: &SearchBudget,
) -> Result<Vec<Witness>, CriticalError> {
    if !(z > 0.0) {
        return Err(CriticalError::NonPositiveThreshold(z));
    }
    let ex = explore(map, domain, budget, rng::tag::Z_CRITICAL)?;
    below(map, &ex, z)
}

pub(crate) fn below(map: &PolynomialMap, ex: &Exploration, z: f64) -> Result<Vec<Witness>, CriticalError> {
    let hits: Vec<Sample> = ex.visits.iter().filter(|(_, v)| *v < z).cloned().collect();
    sorted_unique(hits).into_iter().map(|(x, nu)| witness(map, x, nu, z)).collect()
}

/// The sampled part of `c_z`, as a cloud in the source space.
pub fn find_z_critical(
    map: &PolynomialMap,
    domain: &Domain,
    z: f64,
    budget: &SearchBudget,
) -> Result<PointCloud, CriticalError> {
    let ws = z_critical_witnesses(map, domain, z, budget)?;
    let cloud = PointCloud::from_points(map.n(), ws.into_iter().map(|w| w.x).collect())?;
    Ok(cloud.with_meta("z", z).with_meta("seed", budget.seed).with_meta("samples", budget.samples))
}

/// Critical values: images of polished minimizers with `nu <= tol`,
/// grouped by single linkage.
pub fn estimate_k0(
    map: &PolynomialMap,
    domain: &Domain,
    tol: f64,
    budget: &SearchBudget,
) -> Result<CriticalValueEstimate, CriticalError> {
    if !(tol > 0.0) {
        return Err(CriticalError::NonPositiveThreshold(tol));
    }
    let ex = explore(map, domain, budget, rng::tag::K0)?;
    let kept: Vec<Sample> = ex.minima.into_iter().filter(|(_, v)| *v <= tol).collect();
    let witnesses =
        sorted_unique(kept).into_iter().map(|(x, nu)| witness(map, x, nu, tol)).collect::<Result<Vec<_>, _>>()?;
    let values: Vec<Vec<f64>> = witnesses.iter().map(|w| w.value.clone()).collect();
    let eps = budget.cluster_eps.unwrap_or_else(|| default_cluster_eps(&values));
    Ok(CriticalValueEstimate {
        kind: EstimateKind::K0,
        i: 1,
        cluster_eps: eps,
        clusters: build_clusters(witnesses, eps),
        dropped_clusters: 0,
        parameters: json!({ "tol": tol, "budget": budget, "domain": domain.to_file() }),
        warnings: Vec::new(),
    })
}
