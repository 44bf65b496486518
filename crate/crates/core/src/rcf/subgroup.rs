use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::{Exponent, PuiseuxSeries};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubgroupMode {
    /// `x` belongs iff `valuation(x) > threshold`.
    ValGt,
    /// `x` belongs iff `valuation(x) >= threshold`.
    ValGe,
}

/// Convex subgroup of the Puiseux field cut out by a valuation threshold.
///
/// `{ValGt, 2}` is the group of series bounded by `N T^2` for every positive
/// rational `N`; `{ValGt, 0}` is the group of infinitesimals.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConvexSubgroup {
    pub threshold: Exponent,
    pub mode: SubgroupMode,
}

impl ConvexSubgroup {
    pub fn new(threshold: Exponent, mode: SubgroupMode) -> Self {
        ConvexSubgroup { threshold, mode }
    }

    pub fn infinitesimals() -> Self {
        ConvexSubgroup { threshold: Exponent::zero(), mode: SubgroupMode::ValGt }
    }

    pub fn contains(&self, a: &PuiseuxSeries) -> bool {
        match a.valuation() {
            None => true,
            Some(v) => match self.mode {
                SubgroupMode::ValGt => v > self.threshold,
                SubgroupMode::ValGe => v >= self.threshold,
            },
        }
    }
}
