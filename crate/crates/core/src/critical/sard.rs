use serde::{Deserialize, Serialize};

use super::search::{below, explore};
use super::{CriticalError, Domain, SearchBudget};
use crate::expr::PolynomialMap;
use crate::rcf::PuiseuxSeries;
use crate::rng;
use crate::thin::{thinness_score, PointCloud, ThinnessReport};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SardEntry {
    pub z: f64,
    pub n_points: usize,
    pub thinness: ThinnessReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SardReport {
    pub entries: Vec<SardEntry>,
    pub delta: f64,
    /// Each score is at most the previous one plus `delta`.
    pub non_increasing: bool,
    pub strictly_decreasing: bool,
}

/// Thinness of `f(c_z)` along a decreasing schedule of `z`.
///
/// One exploration serves every `z`, so the sampled sets are nested and
/// the projections shared across entries.
pub fn sard_experiment(
    map: &PolynomialMap,
    domain: &Domain,
    z_schedule: &[f64],
    budget: &SearchBudget,
    delta: f64,
    n_projections: usize,
) -> Result<SardReport, CriticalError> {
    if z_schedule.is_empty() {
        return Err(CriticalError::BadSchedule("no z values".into()));
    }
    if let Some(z) = z_schedule.iter().find(|z| !(**z > 0.0)) {
        return Err(CriticalError::NonPositiveThreshold(*z));
    }
    if !z_schedule.windows(2).all(|w| w[0] > w[1]) {
        return Err(CriticalError::BadSchedule("z values must be strictly decreasing".into()));
    }
    let ex = explore(map, domain, budget, rng::tag::Z_CRITICAL)?;
    let thin_seed = rng::stream_key(budget.seed, &[rng::tag::SARD]);

    let mut entries = Vec::with_capacity(z_schedule.len());
    for &z in z_schedule {
        let ws = below(map, &ex, z)?;
        let cloud = PointCloud::from_points(map.k(), ws.into_iter().map(|w| w.value).collect())?;
        let thinness = thinness_score(&cloud, map.k(), delta, n_projections, thin_seed)?;
        entries.push(SardEntry { z, n_points: cloud.len(), thinness });
    }
    let scores: Vec<f64> = entries.iter().map(|e| e.thinness.score).collect();
    Ok(SardReport {
        non_increasing: scores.windows(2).all(|w| w[1] <= w[0] + delta),
        strictly_decreasing: scores.windows(2).all(|w| w[1] < w[0]),
        entries,
        delta,
    })
}

/// Reads an infinitesimal threshold as the real schedule of its values at
/// the parameters `ts`.
pub fn z_schedule_from_germ(germ: &PuiseuxSeries, ts: &[f64]) -> Result<Vec<f64>, CriticalError> {
    ts.iter()
        .map(|&t| germ.evaluate_at(t).map_err(|e| CriticalError::BadSchedule(format!("germ at t = {t}: {e}"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use num_rational::BigRational;

    use super::*;
    use crate::rcf::Exponent;

    fn map(text: &str) -> PolynomialMap {
        PolynomialMap::parse(text, &["x", "y"]).unwrap()
    }

    fn square() -> Domain {
        Domain::new(vec![[-2.0, 2.0]; 2]).unwrap()
    }

    const ZS: [f64; 3] = [0.5, 0.25, 0.125];

    #[test]
    fn disc_images_shrink() {
        let budget = SearchBudget::default();
        let delta = 5e-3;
        let r = sard_experiment(&map("x^2 + y^2"), &square(), &ZS, &budget, delta, 8).unwrap();
        for e in &r.entries {
            assert!(e.n_points > 0);
            assert!(e.thinness.score <= e.z * e.z / 4.0 + 2.0 * delta, "{} {}", e.z, e.thinness.score);
        }
        assert!(r.non_increasing && r.strictly_decreasing, "{:?}", r.entries);
    }

    #[test]
    fn identity_and_constant_score_zero() {
        let budget = SearchBudget { samples: 512, starts: 8, ..SearchBudget::default() };
        let id = sard_experiment(&map("x; y"), &square(), &ZS, &budget, 0.01, 4).unwrap();
        assert!(id.entries.iter().all(|e| e.n_points == 0 && e.thinness.score == 0.0));
        let c = sard_experiment(&map("3"), &square(), &ZS, &budget, 0.01, 4).unwrap();
        assert!(c.entries.iter().all(|e| e.n_points > 0 && e.thinness.score == 0.0));
    }

    #[test]
    fn schedule_must_decrease() {
        let budget = SearchBudget { samples: 64, starts: 2, ..SearchBudget::default() };
        assert!(sard_experiment(&map("x"), &square(), &[0.1, 0.2], &budget, 0.01, 2).is_err());
        assert!(sard_experiment(&map("x"), &square(), &[], &budget, 0.01, 2).is_err());
    }

    #[test]
    fn germ_schedule() {
        let half = BigRational::new(1.into(), 2.into());
        let germ = PuiseuxSeries::monomial(half, Exponent::from_integer(1), Exponent::from_integer(16));
        let zs = z_schedule_from_germ(&germ, &[1.0, 0.5, 0.25]).unwrap();
        assert_eq!(zs, vec![0.5, 0.25, 0.125]);
    }
}
