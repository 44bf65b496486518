//! Largest ball inside the `delta`-fattening of a projected cloud.
//!
//! The fattened set is sampled on a lattice of spacing `delta / 2`: a node is
//! covered when it lies strictly within `delta` of some point. A ball
//! `B(c, r)` counts as covered when every lattice node at distance `< r`
//! from `c` is covered, so the largest radius at a center is its distance
//! to the nearest uncovered node. Centers are the lattice nodes of even
//! index (spacing `delta`).
//!
//! Small lattices are processed densely with an exact Euclidean distance
//! transform; large ones keep only covered nodes in a hash set and search
//! outward from each center.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{PointCloud, ThinError};
use crate::rabier::OperatorMatrix;
use crate::rng;

/// Dense lattices up to this many nodes use the distance transform.
pub const DENSE_NODE_LIMIT: usize = 1 << 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoverageStrategy {
    Auto,
    Dense,
    Sparse,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThinnessReport {
    pub k: usize,
    pub delta: f64,
    pub n_projections: usize,
    pub seed: u64,
    pub n_points: usize,
    pub per_projection_radius: Vec<f64>,
    /// Median of the per-projection radii.
    pub score: f64,
    pub max_radius: f64,
}

impl ThinnessReport {
    /// Empirically `z`-thin: no fattened ball of radius `z` fits.
    pub fn verdict(&self, z: f64) -> bool {
        self.score < z
    }
}

/// Lattice geometry shared by both strategies.
struct Lattice {
    origin: Vec<f64>,
    h: f64,
    delta: f64,
    /// Number of nodes per axis, including an uncovered border.
    extent: Vec<usize>,
}

impl Lattice {
    fn new(points: &[Vec<f64>], delta: f64) -> Self {
        let k = points[0].len();
        let h = delta / 2.0;
        let mut lo = vec![f64::INFINITY; k];
        let mut hi = vec![f64::NEG_INFINITY; k];
        for p in points {
            for j in 0..k {
                lo[j] = lo[j].min(p[j]);
                hi[j] = hi[j].max(p[j]);
            }
        }
        // Anchored on the global grid of multiples of `delta`, so node
        // positions and center parity do not depend on the cloud.
        let origin: Vec<f64> = lo.iter().map(|l| (((l - delta) / delta).floor() - 1.0) * delta).collect();
        let extent = (0..k).map(|j| ((hi[j] + delta - origin[j]) / h).ceil() as usize + 2).collect();
        Lattice { origin, h, delta, extent }
    }

    fn node_count(&self) -> Option<usize> {
        self.extent.iter().try_fold(1usize, |acc, &m| acc.checked_mul(m))
    }

    /// Calls `f` with the index of every node strictly within `delta` of `p`.
    fn for_covered_nodes(&self, p: &[f64], mut f: impl FnMut(&[i64])) {
        let k = p.len();
        let lo: Vec<i64> =
            (0..k).map(|j| (((p[j] - self.delta - self.origin[j]) / self.h).ceil() as i64).max(0)).collect();
        let hi: Vec<i64> = (0..k)
            .map(|j| (((p[j] + self.delta - self.origin[j]) / self.h).floor() as i64).min(self.extent[j] as i64 - 1))
            .collect();
        if lo.iter().zip(&hi).any(|(a, b)| a > b) {
            return;
        }
        let d2 = self.delta * self.delta;
        let mut idx = lo.clone();
        loop {
            let dist2: f64 = (0..k)
                .map(|j| {
                    let x = self.origin[j] + idx[j] as f64 * self.h - p[j];
                    x * x
                })
                .sum();
            if dist2 < d2 {
                f(&idx);
            }
            // odometer
            let mut j = 0;
            loop {
                if j == k {
                    return;
                }
                if idx[j] < hi[j] {
                    idx[j] += 1;
                    break;
                }
                idx[j] = lo[j];
                j += 1;
            }
        }
    }
}

/// Largest covered-ball radius over all centers, rounded down to a multiple
/// of `delta / 2` by bisection. A cloud with a single distinct point
/// contains no ball and gets radius 0.
pub fn inscribed_radius(points: &[Vec<f64>], delta: f64, strategy: CoverageStrategy) -> f64 {
    if points.is_empty() || points.iter().all(|p| *p == points[0]) {
        return 0.0;
    }
    let lattice = Lattice::new(points, delta);
    let dense = match strategy {
        CoverageStrategy::Dense => true,
        CoverageStrategy::Sparse => false,
        CoverageStrategy::Auto => lattice.node_count().is_some_and(|n| n <= DENSE_NODE_LIMIT),
    };
    let radii = if dense { dense_center_radii(&lattice, points) } else { sparse_center_radii(&lattice, points) };

    // Bisection over the fixed ladder of multiples of `delta / 2`, which keeps
    // the answer monotone in the covered set.
    let fits = |m: u64| radii.iter().any(|&c| c >= m as f64 * lattice.h);
    let best = radii.iter().copied().fold(0.0, f64::max);
    let (mut lo, mut hi) = (0u64, (best / lattice.h).ceil() as u64 + 1);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if fits(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo as f64 * lattice.h
}

fn strides(extent: &[usize]) -> Vec<usize> {
    let mut s = vec![1; extent.len()];
    for j in (0..extent.len().saturating_sub(1)).rev() {
        s[j] = s[j + 1] * extent[j + 1];
    }
    s
}

/// Start offsets of every lattice line along `axis`.
fn line_starts(extent: &[usize], axis: usize) -> Vec<usize> {
    let st = strides(extent);
    let mut starts = vec![0usize];
    for (j, &m) in extent.iter().enumerate() {
        if j == axis {
            continue;
        }
        let stride = st[j];
        starts = starts.iter().flat_map(|&b| (0..m).map(move |i| b + i * stride)).collect();
    }
    starts
}

/// Squared distance transform of a sampled function along one line
/// (lower envelope of parabolas).
fn envelope_1d(f: &[f64], out: &mut [f64], v: &mut Vec<usize>, z: &mut Vec<f64>) {
    let n = f.len();
    v.clear();
    z.clear();
    v.push(0);
    z.push(f64::NEG_INFINITY);
    z.push(f64::INFINITY);
    let sep = |q: usize, p: usize| {
        let (qf, pf) = (q as f64, p as f64);
        ((f[q] + qf * qf) - (f[p] + pf * pf)) / (2.0 * (qf - pf))
    };
    for q in 1..n {
        let mut s = sep(q, v[v.len() - 1]);
        while s <= z[v.len() - 1] {
            v.pop();
            z.pop();
            s = sep(q, v[v.len() - 1]);
        }
        v.push(q);
        let last = z.len() - 1;
        z[last] = s;
        z.push(f64::INFINITY);
    }
    let mut kk = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[kk + 1] < q as f64 {
            kk += 1;
        }
        let d = q as f64 - v[kk] as f64;
        *o = d * d + f[v[kk]];
    }
}

fn dense_center_radii(lattice: &Lattice, points: &[Vec<f64>]) -> Vec<f64> {
    let extent = &lattice.extent;
    let k = extent.len();
    let st = strides(extent);
    let total: usize = extent.iter().product();
    let mut covered = vec![false; total];
    for p in points {
        lattice.for_covered_nodes(p, |idx| {
            let off: usize = idx.iter().zip(&st).map(|(&i, &s)| i as usize * s).sum();
            covered[off] = true;
        });
    }

    // first axis: exact 1D distance to the nearest uncovered node (the border
    // guarantees one on every line)
    let mut dist = vec![0.0f64; total];
    let last = k - 1;
    for start in line_starts(extent, last) {
        let m = extent[last];
        let mut run = f64::INFINITY;
        for i in 0..m {
            let o = start + i * st[last];
            run = if covered[o] { run + 1.0 } else { 0.0 };
            dist[o] = run;
        }
        run = f64::INFINITY;
        for i in (0..m).rev() {
            let o = start + i * st[last];
            run = if covered[o] { run + 1.0 } else { 0.0 };
            dist[o] = (dist[o].min(run)).powi(2);
        }
    }
    drop(covered);

    let (mut v, mut z) = (Vec::new(), Vec::new());
    for axis in (0..last).rev() {
        let m = extent[axis];
        let mut line = vec![0.0; m];
        let mut out = vec![0.0; m];
        for start in line_starts(extent, axis) {
            for i in 0..m {
                line[i] = dist[start + i * st[axis]];
            }
            envelope_1d(&line, &mut out, &mut v, &mut z);
            for i in 0..m {
                dist[start + i * st[axis]] = out[i];
            }
        }
    }

    // centers: nodes with all-even indices
    let mut radii = Vec::new();
    let mut idx = vec![0usize; k];
    'outer: loop {
        let off: usize = idx.iter().zip(&st).map(|(i, s)| i * s).sum();
        if dist[off] > 0.0 {
            radii.push(dist[off].sqrt() * lattice.h);
        }
        let mut j = 0;
        loop {
            if j == k {
                break 'outer;
            }
            if idx[j] + 2 < extent[j] {
                idx[j] += 2;
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
    radii
}

/// Integer offsets with squared norm in `(0, rho^2]`, nearest first.
fn sorted_offsets(k: usize, rho: i64) -> Vec<(i64, Vec<i64>)> {
    let mut out = Vec::new();
    let mut idx = vec![-rho; k];
    loop {
        let n2: i64 = idx.iter().map(|v| v * v).sum();
        if n2 > 0 && n2 <= rho * rho {
            out.push((n2, idx.clone()));
        }
        let mut j = 0;
        loop {
            if j == k {
                out.sort();
                return out;
            }
            if idx[j] < rho {
                idx[j] += 1;
                break;
            }
            idx[j] = -rho;
            j += 1;
        }
    }
}

fn sparse_center_radii(lattice: &Lattice, points: &[Vec<f64>]) -> Vec<f64> {
    let mut covered: HashSet<Vec<i64>> = HashSet::new();
    for p in points {
        lattice.for_covered_nodes(p, |idx| {
            covered.insert(idx.to_vec());
        });
    }
    let mut centers: Vec<Vec<i64>> = covered.iter().filter(|i| i.iter().all(|v| v % 2 == 0)).cloned().collect();
    centers.sort();

    let k = lattice.extent.len();
    let mut radii = vec![f64::NAN; centers.len()];
    let mut pending: Vec<usize> = (0..centers.len()).collect();
    let mut rho = 8i64;
    while !pending.is_empty() {
        let offsets = sorted_offsets(k, rho);
        let found: Vec<Option<f64>> = pending
            .par_iter()
            .map(|&c| {
                let center = &centers[c];
                let mut probe = vec![0i64; k];
                for (n2, off) in &offsets {
                    for j in 0..k {
                        probe[j] = center[j] + off[j];
                    }
                    if !covered.contains(&probe) {
                        return Some((*n2 as f64).sqrt() * lattice.h);
                    }
                }
                None
            })
            .collect();
        let mut still = Vec::new();
        for (&c, r) in pending.iter().zip(found) {
            match r {
                Some(r) => radii[c] = r,
                None => still.push(c),
            }
        }
        pending = still;
        rho *= 2;
    }
    radii
}

/// Thinness of `cloud` in `k` dimensions: inscribed-ball radius of the
/// `delta`-fattened image under `n_projections` seeded random projections,
/// aggregated by the median. An empty cloud scores 0.
pub fn thinness_score(
    cloud: &PointCloud,
    k: usize,
    delta: f64,
    n_projections: usize,
    seed: u64,
) -> Result<ThinnessReport, ThinError> {
    thinness_score_with(cloud, k, delta, n_projections, seed, CoverageStrategy::Auto)
}

pub(crate) fn thinness_score_with(
    cloud: &PointCloud,
    k: usize,
    delta: f64,
    n_projections: usize,
    seed: u64,
    strategy: CoverageStrategy,
) -> Result<ThinnessReport, ThinError> {
    let d = cloud.dim();
    if k == 0 || k > d {
        return Err(ThinError::BadTargetDimension { k, n: d });
    }
    if !(delta > 0.0) {
        return Err(ThinError::NonPositiveDelta(delta));
    }
    if n_projections == 0 {
        return Err(ThinError::TooFew { what: "projections", needed: 1 });
    }
    let radii: Vec<f64> = if cloud.is_empty() {
        vec![0.0; n_projections]
    } else {
        let projections = (0..n_projections)
            .map(|p| super::random_projection(d, k, rng::stream_key(seed, &[p as u64])))
            .collect::<Result<Vec<_>, _>>()?;
        projections.par_iter().map(|proj| inscribed_radius(&project(proj, cloud.points()), delta, strategy)).collect()
    };
    let mut sorted = radii.clone();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    let score = if m % 2 == 1 { sorted[m / 2] } else { 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]) };
    Ok(ThinnessReport {
        k,
        delta,
        n_projections,
        seed,
        n_points: cloud.len(),
        score,
        max_radius: sorted[m - 1],
        per_projection_radius: radii,
    })
}

fn project(p: &OperatorMatrix, points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    points.iter().map(|x| (0..p.rows()).map(|i| p.row(i).iter().zip(x).map(|(a, b)| a * b).sum()).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn segment(n: usize) -> Vec<Vec<f64>> {
        (0..n).map(|i| vec![i as f64 / (n - 1) as f64, 0.0]).collect()
    }

    fn square_grid(step: f64) -> Vec<Vec<f64>> {
        let m = (1.0 / step).round() as usize;
        let mut pts = Vec::new();
        for i in 0..=m {
            for j in 0..=m {
                pts.push(vec![i as f64 * step, j as f64 * step]);
            }
        }
        pts
    }

    #[test]
    fn envelope_matches_brute_force() {
        let f = [0.0, 4.0, 1e9, 1.0, 9.0, 0.0, 2.5];
        let mut out = vec![0.0; f.len()];
        envelope_1d(&f, &mut out, &mut Vec::new(), &mut Vec::new());
        for (q, got) in out.iter().enumerate() {
            let want =
                f.iter().enumerate().map(|(p, fp)| (q as f64 - p as f64).powi(2) + fp).fold(f64::INFINITY, f64::min);
            assert_eq!(*got, want, "q = {q}");
        }
    }

    #[test]
    fn strategies_agree() {
        let d = 0.05;
        for pts in [segment(30), square_grid(0.05), vec![vec![0.0, 0.0], vec![0.07, 0.01], vec![0.3, 0.3]]] {
            let a = inscribed_radius(&pts, d, CoverageStrategy::Dense);
            let b = inscribed_radius(&pts, d, CoverageStrategy::Sparse);
            assert_eq!(a, b);
        }
        let cube: Vec<Vec<f64>> =
            (0..216).map(|i| vec![(i % 6) as f64 * 0.1, ((i / 6) % 6) as f64 * 0.1, (i / 36) as f64 * 0.1]).collect();
        assert_eq!(
            inscribed_radius(&cube, 0.1, CoverageStrategy::Dense),
            inscribed_radius(&cube, 0.1, CoverageStrategy::Sparse)
        );
    }

    #[test]
    fn segment_is_thin() {
        let r = inscribed_radius(&segment(200), 0.02, CoverageStrategy::Auto);
        assert!(r <= 0.04 && r > 0.0, "{r}");
    }

    #[test]
    fn square_is_fat() {
        let r = inscribed_radius(&square_grid(0.01), 0.02, CoverageStrategy::Auto);
        assert!(r >= 0.4, "{r}");
    }

    #[test]
    fn single_point_has_no_ball() {
        assert_eq!(inscribed_radius(&[vec![1.0, 2.0]], 0.1, CoverageStrategy::Auto), 0.0);
        assert_eq!(inscribed_radius(&[vec![1.0], vec![1.0]], 0.1, CoverageStrategy::Auto), 0.0);
    }

    #[test]
    fn report_contract() {
        let c = PointCloud::from_points(2, square_grid(0.05)).unwrap();
        let rep = thinness_score(&c, 2, 0.05, 5, 3).unwrap();
        assert_eq!(rep.per_projection_radius.len(), 5);
        assert!(0.0 <= rep.score && rep.score <= rep.max_radius);
        assert!(rep.verdict(rep.score + 1e-9) && !rep.verdict(rep.score));

        let empty = thinness_score(&PointCloud::new(3), 2, 0.1, 4, 0).unwrap();
        assert_eq!(empty.score, 0.0);
        assert!(empty.verdict(1e-300));

        assert!(thinness_score(&c, 3, 0.1, 4, 0).is_err());
        assert!(thinness_score(&c, 2, 0.0, 4, 0).is_err());
        assert!(thinness_score(&c, 2, 0.1, 0, 0).is_err());
    }
}
