//! Truncated Puiseux series with rational exponents and coefficients.
//!
//! A [`PuiseuxSeries`] is a finite sum `sum c_i T^{q_i}` together with a
//! truncation order: every term of exponent `>= trunc_order` is unknown and
//! discarded. The field is ordered by the sign of the lowest-order
//! coefficient, which makes `T` positive and smaller than every positive
//! rational, so elements of positive valuation are the infinitesimals.
//! Negative exponents are allowed so that every nonzero element is
//! invertible.

mod series;
mod subgroup;

pub use series::{CompareOutcome, PuiseuxSeries, DEFAULT_TRUNC};
pub use subgroup::{ConvexSubgroup, SubgroupMode};

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};

/// Rational exponent.
pub type Exponent = Ratio<i64>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RcfError {
    #[error("division by the zero series")]
    DivisionByZero,
    #[error("evaluation parameter must be positive, got {0}")]
    NonPositiveParameter(f64),
    #[error("evaluation overflowed at t = {t}")]
    Overflow { t: f64 },
    #[error("could not parse rational {0:?}")]
    BadRational(String),
}

/// Parse `"3"`, `"-1/2"` or `"0.25"` as an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational, RcfError> {
    let bad = || RcfError::BadRational(s.to_string());
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q == BigInt::from(0) {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
        if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let mut numer: BigInt = digits.parse().map_err(|_| bad())?;
        if neg {
            numer = -numer;
        }
        return Ok(BigRational::new(numer, num_traits::pow(BigInt::from(10), frac.len())));
    }
    let p: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(p))
}

/// Parse a rational exponent, which must fit in `i64 / i64`.
pub fn parse_exponent(s: &str) -> Result<Exponent, RcfError> {
    use num_traits::ToPrimitive;
    let r = parse_rational(s)?;
    match (r.numer().to_i64(), r.denom().to_i64()) {
        (Some(p), Some(q)) => Ok(Ratio::new(p, q)),
        _ => Err(RcfError::BadRational(s.to_string())),
    }
}
