//! Critical points and critical values of polynomial maps.
//!
//! `find_z_critical` samples the set where `nu` of the differential is below
//! `z`. The estimators collect candidate values in `K0` (ordinary critical
//! values), `Kinf` (asymptotic values along spheres `|x| = l`) and `K1`
//! (asymptotic values near the frontier of a constrained domain).

mod asymptotic;
mod cluster;
mod domain;
pub mod nelder_mead;
mod sard;
mod search;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{ExprError, PolynomialMap};
use crate::rabier::{self, RabierError};
use crate::thin::ThinError;

pub use asymptotic::{estimate_k1, estimate_kinf};
pub use cluster::{default_cluster_eps, single_linkage};
pub use domain::{Domain, DomainFile};
pub use sard::{sard_experiment, z_schedule_from_germ, SardEntry, SardReport};
pub use search::{estimate_k0, find_z_critical, z_critical_witnesses};

#[derive(Debug, Error)]
pub enum CriticalError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Rabier(#[from] RabierError),
    #[error(transparent)]
    Thin(#[from] ThinError),
    #[error("point has {got} coordinates, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("map has k = {k} > n = {n}")]
    KExceedsN { k: usize, n: usize },
    #[error("no sample lies inside the domain")]
    EmptyDomain,
    #[error("invalid box: {0}")]
    BadBox(String),
    #[error("threshold must be positive, got {0}")]
    NonPositiveThreshold(f64),
    #[error("invalid schedule: {0}")]
    BadSchedule(String),
    #[error("invalid budget: {0}")]
    BadBudget(String),
    #[error("domain has no constraints, so its frontier is empty")]
    NoConstraints,
}

/// Sampling and polishing effort for a search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub samples: usize,
    /// Number of simplex polishing runs.
    pub starts: usize,
    pub nm_iters: usize,
    pub restarts: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Single-linkage threshold; `None` selects `default_cluster_eps`.
    pub cluster_eps: Option<f64>,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            samples: 4096,
            starts: 32,
            nm_iters: 200,
            restarts: 2,
            batch_size: 256,
            seed: 0,
            cluster_eps: None,
        }
    }
}

impl SearchBudget {
    fn validate(&self) -> Result<(), CriticalError> {
        if self.samples == 0 || self.batch_size == 0 {
            return Err(CriticalError::BadBudget("samples and batch_size must be positive".into()));
        }
        if let Some(eps) = self.cluster_eps {
            if !(eps > 0.0) {
                return Err(CriticalError::BadBudget(format!("cluster_eps must be positive, got {eps}")));
            }
        }
        Ok(())
    }
}

/// Scales for the asymptotic estimators: radii `l` (increasing) for `Kinf`,
/// frontier distances `t` (decreasing) for `K1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub i: u32,
    pub scales: Vec<f64>,
    pub samples_per_scale: usize,
    pub seed: u64,
}

impl Schedule {
    fn validate(&self, increasing: bool) -> Result<(), CriticalError> {
        if self.i == 0 {
            return Err(CriticalError::BadSchedule("i must be positive".into()));
        }
        if self.samples_per_scale == 0 {
            return Err(CriticalError::BadSchedule("samples_per_scale must be positive".into()));
        }
        if self.scales.is_empty() {
            return Err(CriticalError::BadSchedule("no scales".into()));
        }
        if let Some(s) = self.scales.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return Err(CriticalError::BadSchedule(format!("scale {s} is not a positive number")));
        }
        let monotone = self.scales.windows(2).all(|w| if increasing { w[0] < w[1] } else { w[0] > w[1] });
        if !monotone {
            let dir = if increasing { "increasing" } else { "decreasing" };
            return Err(CriticalError::BadSchedule(format!("scales must be strictly {dir}")));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimateKind {
    K0,
    Kinf,
    K1,
}

impl EstimateKind {
    /// Bound on `nu` a witness at `scale` must meet.
    pub fn threshold(self, scale: f64, i: u32) -> f64 {
        let i = f64::from(i);
        match self {
            EstimateKind::K0 => scale,
            EstimateKind::Kinf => scale.powf(-(1.0 + 1.0 / i)),
            EstimateKind::K1 => scale.powf(1.0 / i),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: Vec<f64>,
    pub value: Vec<f64>,
    pub nu: f64,
    pub scale: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub center: Vec<f64>,
    pub radius: f64,
    pub support: usize,
    pub witnesses: Vec<Witness>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalValueEstimate {
    pub kind: EstimateKind,
    /// Exponent parameter of the asymptotic criteria; 1 for `K0`.
    pub i: u32,
    pub cluster_eps: f64,
    pub clusters: Vec<Cluster>,
    /// Clusters found but rejected as not persistent.
    pub dropped_clusters: usize,
    pub parameters: serde_json::Value,
    pub warnings: Vec<String>,
}

impl CriticalValueEstimate {
    /// Witnesses whose `nu`, recomputed from `x`, misses the bound of their
    /// scale. Empty for every estimate this module produces.
    pub fn violations(&self, map: &PolynomialMap) -> Result<Vec<&Witness>, CriticalError> {
        let mut bad = Vec::new();
        for w in self.clusters.iter().flat_map(|c| &c.witnesses) {
            let nu = nu_at(map, &w.x)?;
            if !(nu <= self.kind.threshold(w.scale, self.i)) || nu != w.nu {
                bad.push(w);
            }
        }
        Ok(bad)
    }
}

/// `nu` of the Jacobian of `map` at `x`.
pub fn nu_at(map: &PolynomialMap, x: &[f64]) -> Result<f64, CriticalError> {
    if x.len() != map.n() {
        return Err(CriticalError::DimensionMismatch { expected: map.n(), got: x.len() });
    }
    let j = map.jacobian().eval_f64(x)?;
    Ok(rabier::nu(&j)?)
}

/// `(1 + |x|) * nu_at(map, x)`.
pub fn kos_weight(map: &PolynomialMap, x: &[f64]) -> Result<f64, CriticalError> {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok((1.0 + norm) * nu_at(map, x)?)
}

/// The map `g_t(x) = f(x / t)`, built by exact substitution.
pub fn rescaled_map(map: &PolynomialMap, t: f64) -> Result<PolynomialMap, CriticalError> {
    let exact = BigRational::from_float(t).filter(|_| t > 0.0).ok_or(CriticalError::NonPositiveThreshold(t))?;
    Ok(map.rescale_arguments(&exact.recip()))
}

fn check_dims(map: &PolynomialMap, domain: Option<&Domain>) -> Result<(), CriticalError> {
    if map.k() > map.n() {
        return Err(CriticalError::KExceedsN { k: map.k(), n: map.n() });
    }
    if let Some(d) = domain {
        if d.dim() != map.n() {
            return Err(CriticalError::DimensionMismatch { expected: map.n(), got: d.dim() });
        }
    }
    Ok(())
}

/// `nu` with failures mapped to `+inf`, for use as an objective.
fn nu_or_inf(map: &PolynomialMap, x: &[f64]) -> f64 {
    nu_at(map, x).unwrap_or(f64::INFINITY)
}

fn witness(map: &PolynomialMap, x: Vec<f64>, nu: f64, scale: f64) -> Result<Witness, CriticalError> {
    let value = map.eval_f64(&x)?;
    Ok(Witness { x, value, nu, scale })
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter().zip(b).map(|(p, q)| p.total_cmp(q)).find(|o| o.is_ne()).unwrap_or(a.len().cmp(&b.len()))
}
