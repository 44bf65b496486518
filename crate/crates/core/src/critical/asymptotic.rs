//! Estimators for values approached at infinity (`Kinf`) and near the
//! frontier of the domain (`K1`).
//!
//! Both run one sampling pass per scale, keep points meeting the
//! scale-dependent bound on `nu`, cluster all retained values together and
//! report the clusters fed by every scale in the top half of the schedule.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde_json::json;

use super::cluster::{build_clusters, persistent};
use super::nelder_mead::{self, NmOptions};
use super::search::select_starts;
use super::{
    check_dims, default_cluster_eps, lex_cmp, nu_or_inf, witness, CriticalError, CriticalValueEstimate, Domain,
    EstimateKind, Schedule, SearchBudget, Witness,
};
use crate::expr::PolynomialMap;
use crate::rng;

/// Values approached along spheres `|x| = l` with
/// `nu <= l^(-(1 + 1/i))`. Scales must increase. The schedule supplies the
/// seed and sample count; the budget supplies the polishing effort.
pub fn estimate_kinf(
    map: &PolynomialMap,
    schedule: &Schedule,
    budget: &SearchBudget,
) -> Result<CriticalValueEstimate, CriticalError> {
    check_dims(map, None)?;
    schedule.validate(true)?;
    budget.validate()?;
    let kind = EstimateKind::Kinf;
    let n = map.n();
    let opts = NmOptions { max_iters: budget.nm_iters, restarts: budget.restarts, ..NmOptions::default() };

    let mut witnesses = Vec::new();
    for (s, &l) in schedule.scales.iter().enumerate() {
        let thr = kind.threshold(l, schedule.i);
        let samples = sphere_samples(n, l, schedule.samples_per_scale, budget.batch_size, schedule.seed, s as u64);
        let nus: Vec<f64> = samples.par_iter().map(|x| nu_or_inf(map, x)).collect();

        let spacing = l / (budget.starts.max(1) as f64).powf(1.0 / (n.max(2) - 1) as f64);
        let starts = if n > 1 { select_starts(&samples, &nus, budget.starts, spacing) } else { Vec::new() };
        let polished: Vec<(Vec<f64>, f64)> = starts
            .par_iter()
            .map(|&st| {
                let x0 = &samples[st];
                let basis = tangent_basis(x0);
                let lift = |u: &[f64]| -> Vec<f64> {
                    let mut y = x0.clone();
                    for (b, c) in basis.iter().zip(u) {
                        y.iter_mut().zip(b).for_each(|(yi, bi)| *yi += c * bi);
                    }
                    let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
                    y.into_iter().map(|v| l * v / norm).collect()
                };
                let step = vec![0.05 * l; n - 1];
                let res =
                    nelder_mead::minimize(|u| nu_or_inf(map, &lift(u)), &vec![0.0; n - 1], &step, &opts, |_, _| {});
                let x = lift(&res.x);
                let nu = nu_or_inf(map, &x);
                (x, nu)
            })
            .collect();

        let kept = samples.into_iter().zip(nus).chain(polished).filter(|(_, nu)| *nu <= thr);
        witnesses.extend(collect_scale(map, kept, l)?);
    }

    let top = top_half(&schedule.scales);
    let (clusters, dropped, eps) = finish(witnesses, budget, &top);
    Ok(CriticalValueEstimate {
        kind,
        i: schedule.i,
        cluster_eps: eps,
        clusters,
        dropped_clusters: dropped,
        parameters: json!({ "schedule": schedule, "budget": budget, "persistence_scales": top }),
        warnings: Vec::new(),
    })
}

/// Values approached near the frontier: points in shells
/// `t/2 < d(x) < 2t` (first-order distance to the frontier) with
/// `nu <= t^(1/i)`. Scales must decrease. A scale whose shell yields no
/// sample is skipped with a warning and not required for persistence.
pub fn estimate_k1(
    map: &PolynomialMap,
    domain: &Domain,
    schedule: &Schedule,
    budget: &SearchBudget,
) -> Result<CriticalValueEstimate, CriticalError> {
    check_dims(map, Some(domain))?;
    schedule.validate(false)?;
    budget.validate()?;
    let Some(constraints) = domain.constraints() else {
        return Err(CriticalError::NoConstraints);
    };
    let kind = EstimateKind::K1;
    let n = map.n();
    let m = constraints.k();
    let opts = NmOptions { max_iters: budget.nm_iters, restarts: budget.restarts, ..NmOptions::default() };
    let bounds = domain.bounds();

    let mut witnesses = Vec::new();
    let mut warnings = Vec::new();
    let mut populated = Vec::new();
    for (s, &t) in schedule.scales.iter().enumerate() {
        let thr = kind.threshold(t, schedule.i);
        let in_shell =
            |x: &[f64]| domain.contains(x) && domain.frontier_distance(x).is_some_and(|d| t / 2.0 < d && d < 2.0 * t);
        let total = schedule.samples_per_scale;
        let batches = total.div_ceil(budget.batch_size);
        let drawn: Vec<Vec<Vec<f64>>> = (0..batches)
            .into_par_iter()
            .map(|b| {
                let mut r = rng::stream(schedule.seed, &[rng::tag::K1, s as u64, b as u64]);
                let count = budget.batch_size.min(total - b * budget.batch_size);
                let mut out = Vec::with_capacity(count);
                for _ in 0..count {
                    let x: Vec<f64> = bounds.iter().map(|[lo, hi]| r.random_range(*lo..*hi)).collect();
                    let j = r.random_range(0..m);
                    let offset = r.random_range(t / 2.0..2.0 * t);
                    let Some(p) = domain.project_to_frontier(j, &x) else { continue };
                    let Some(normal) = domain.inward_normal(j, &p) else { continue };
                    let y: Vec<f64> = p.iter().zip(&normal).map(|(a, b)| a + offset * b).collect();
                    if in_shell(&y) {
                        out.push(y);
                    }
                }
                out
            })
            .collect();
        let samples: Vec<Vec<f64>> = drawn.into_iter().flatten().collect();
        if samples.is_empty() {
            warnings.push(format!("shell at t = {t} is empty; scale skipped"));
            continue;
        }
        populated.push(t);
        let nus: Vec<f64> = samples.par_iter().map(|x| nu_or_inf(map, x)).collect();

        let spacing = domain.diameter() / (2.0 * (budget.starts.max(1) as f64).powf(1.0 / n as f64));
        let starts = select_starts(&samples, &nus, budget.starts, spacing);
        let step = vec![t / 2.0; n];
        let polished: Vec<(Vec<f64>, f64)> = starts
            .par_iter()
            .map(|&st| {
                let objective = |x: &[f64]| if in_shell(x) { nu_or_inf(map, x) } else { f64::INFINITY };
                let res = nelder_mead::minimize(objective, &samples[st], &step, &opts, |_, _| {});
                (res.x, res.value)
            })
            .collect();

        let kept = samples.into_iter().zip(nus).chain(polished).filter(|(_, nu)| *nu <= thr);
        witnesses.extend(collect_scale(map, kept, t)?);
    }

    let required: Vec<f64> = top_half(&schedule.scales).into_iter().filter(|t| populated.contains(t)).collect();
    let (clusters, dropped, eps) = finish(witnesses, budget, &required);
    Ok(CriticalValueEstimate {
        kind,
        i: schedule.i,
        cluster_eps: eps,
        clusters,
        dropped_clusters: dropped,
        parameters: json!({
            "schedule": schedule,
            "budget": budget,
            "domain": domain.to_file(),
            "persistence_scales": required,
        }),
        warnings,
    })
}

fn collect_scale(
    map: &PolynomialMap,
    kept: impl Iterator<Item = (Vec<f64>, f64)>,
    scale: f64,
) -> Result<Vec<Witness>, CriticalError> {
    let mut kept: Vec<(Vec<f64>, f64)> = kept.collect();
    kept.sort_by(|a, b| lex_cmp(&a.0, &b.0));
    kept.dedup_by(|a, b| a.0 == b.0);
    kept.into_iter().map(|(x, nu)| witness(map, x, nu, scale)).collect()
}

fn finish(witnesses: Vec<Witness>, budget: &SearchBudget, required: &[f64]) -> (Vec<super::Cluster>, usize, f64) {
    let values: Vec<Vec<f64>> = witnesses.iter().map(|w| w.value.clone()).collect();
    let eps = budget.cluster_eps.unwrap_or_else(|| default_cluster_eps(&values));
    let (kept, dropped) = persistent(build_clusters(witnesses, eps), required);
    (kept, dropped, eps)
}

/// The last `ceil(m / 2)` scales of the schedule.
fn top_half(scales: &[f64]) -> Vec<f64> {
    scales[scales.len() / 2..].to_vec()
}

/// Normalized Gaussian directions scaled to radius `l`, drawn in batches
/// from independent sub-streams.
fn sphere_samples(n: usize, l: f64, count: usize, batch: usize, seed: u64, scale_idx: u64) -> Vec<Vec<f64>> {
    let batches = count.div_ceil(batch);
    let drawn: Vec<Vec<Vec<f64>>> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut r = rng::stream(seed, &[rng::tag::KINF, scale_idx, b as u64]);
            let size = batch.min(count - b * batch);
            let mut out = Vec::with_capacity(size);
            while out.len() < size {
                let g: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut r)).collect();
                let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm > 1e-12 {
                    out.push(g.into_iter().map(|v| l * v / norm).collect());
                }
            }
            out
        })
        .collect();
    drawn.into_iter().flatten().collect()
}

/// Orthonormal basis of the complement of `x` (`n - 1` vectors).
fn tangent_basis(x: &[f64]) -> Vec<Vec<f64>> {
    let n = x.len();
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut basis: Vec<Vec<f64>> = vec![x.iter().map(|v| v / norm).collect()];
    // drop the coordinate axis most aligned with x
    let skip = (0..n).max_by(|&a, &b| x[a].abs().total_cmp(&x[b].abs()).then(b.cmp(&a))).unwrap_or(0);
    for e in (0..n).filter(|&e| e != skip) {
        let mut v = vec![0.0; n];
        v[e] = 1.0;
        for _ in 0..2 {
            for b in &basis {
                let dot: f64 = v.iter().zip(b).map(|(p, q)| p * q).sum();
                v.iter_mut().zip(b).for_each(|(p, q)| *p -= dot * q);
            }
        }
        let vn = v.iter().map(|p| p * p).sum::<f64>().sqrt();
        basis.push(v.into_iter().map(|p| p / vn).collect());
    }
    basis.remove(0);
    basis
}
