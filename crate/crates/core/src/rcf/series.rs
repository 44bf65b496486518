use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{Exponent, RcfError};
use crate::expr::{Constant, Scalar};

/// Truncation order used when none is given.
pub const DEFAULT_TRUNC: i64 = 16;

/// Finite Puiseux series `sum c_i T^{q_i}` known up to `T^{trunc_order}`.
///
/// Terms are kept sorted by strictly increasing exponent, with nonzero
/// coefficients and every exponent below the truncation order.
#[derive(Clone, Debug)]
pub struct PuiseuxSeries {
    terms: Vec<(Exponent, BigRational)>,
    trunc: Exponent,
}

/// Result of [`PuiseuxSeries::compare_flagged`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CompareOutcome {
    pub ordering: Ordering,
    /// The difference vanished only because terms at or above the shared
    /// truncation order were discarded.
    pub truncated: bool,
}

fn min_opt(a: Option<Exponent>, b: Option<Exponent>) -> Option<Exponent> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Raw product of two term lists, dropping exponents `>= trunc`.
fn mul_terms(
    a: &[(Exponent, BigRational)],
    b: &[(Exponent, BigRational)],
    trunc: Exponent,
) -> Vec<(Exponent, BigRational)> {
    let mut acc: BTreeMap<Exponent, BigRational> = BTreeMap::new();
    for (qa, ca) in a {
        for (qb, cb) in b {
            let q = *qa + *qb;
            if q >= trunc {
                continue;
            }
            let entry = acc.entry(q).or_insert_with(BigRational::zero);
            *entry += ca * cb;
        }
    }
    acc.into_iter().filter(|(_, c)| !c.is_zero()).collect()
}

impl PuiseuxSeries {
    /// Build from arbitrary terms: sorts, merges equal exponents, drops zero
    /// coefficients and everything at or above `trunc`.
    pub fn from_terms<I>(terms: I, trunc: Exponent) -> Self
    where
        I: IntoIterator<Item = (Exponent, BigRational)>,
    {
        let mut acc: BTreeMap<Exponent, BigRational> = BTreeMap::new();
        for (q, c) in terms {
            if q < trunc {
                *acc.entry(q).or_insert_with(BigRational::zero) += c;
            }
        }
        let terms = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        PuiseuxSeries { terms, trunc }
    }

    pub fn zero(trunc: Exponent) -> Self {
        PuiseuxSeries { terms: Vec::new(), trunc }
    }

    pub fn from_rational(c: BigRational, trunc: Exponent) -> Self {
        Self::from_terms([(Exponent::zero(), c)], trunc)
    }

    pub fn from_int(c: i64, trunc: Exponent) -> Self {
        Self::from_rational(BigRational::from_integer(BigInt::from(c)), trunc)
    }

    pub fn one(trunc: Exponent) -> Self {
        Self::from_int(1, trunc)
    }

    /// `c * T^q`.
    pub fn monomial(c: BigRational, q: Exponent, trunc: Exponent) -> Self {
        Self::from_terms([(q, c)], trunc)
    }

    /// The indeterminate `T` at the default truncation order.
    pub fn t() -> Self {
        Self::monomial(BigRational::one(), Exponent::one(), Ratio::from_integer(DEFAULT_TRUNC))
    }

    pub fn terms(&self) -> &[(Exponent, BigRational)] {
        &self.terms
    }

    pub fn trunc_order(&self) -> Exponent {
        self.trunc
    }

    /// Same element with a lower truncation order (no-op when `trunc` is
    /// not below the current one).
    pub fn truncate(&self, trunc: Exponent) -> Self {
        Self::from_terms(self.terms.iter().cloned(), trunc.min(self.trunc))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Lowest exponent; `None` stands for `+infinity` (the zero series).
    pub fn valuation(&self) -> Option<Exponent> {
        self.terms.first().map(|(q, _)| *q)
    }

    pub fn leading_coefficient(&self) -> Option<&BigRational> {
        self.terms.first().map(|(_, c)| c)
    }

    /// -1, 0 or 1 by the sign of the leading coefficient.
    pub fn signum(&self) -> i32 {
        match self.leading_coefficient() {
            None => 0,
            Some(c) if c.is_positive() => 1,
            Some(_) => -1,
        }
    }

    pub fn abs(&self) -> Self {
        if self.signum() < 0 {
            -self
        } else {
            self.clone()
        }
    }

    /// Multiplicative inverse by factoring out the leading term and
    /// expanding the geometric series of the remainder.
    ///
    /// For `a = c T^v (1 + u)` known up to `T^t`, the result is known up to
    /// `T^{t - 2v}`.
    pub fn inv(&self) -> Result<Self, RcfError> {
        let (v, c) = match self.terms.first() {
            Some((v, c)) => (*v, c.clone()),
            None => return Err(RcfError::DivisionByZero),
        };
        let rel_trunc = self.trunc - v;
        let c_inv = c.recip();
        // -u, with exponents relative to the leading term
        let minus_u: Vec<(Exponent, BigRational)> =
            self.terms[1..].iter().map(|(q, ci)| (*q - v, -(ci * &c_inv))).collect();

        let mut sum: BTreeMap<Exponent, BigRational> = BTreeMap::new();
        sum.insert(Exponent::zero(), BigRational::one());
        let mut power = vec![(Exponent::zero(), BigRational::one())];
        loop {
            power = mul_terms(&power, &minus_u, rel_trunc);
            if power.is_empty() {
                break;
            }
            for (q, coef) in &power {
                *sum.entry(*q).or_insert_with(BigRational::zero) += coef;
            }
        }
        let out_trunc = self.trunc - v - v;
        Ok(Self::from_terms(sum.into_iter().map(|(q, coef)| (q - v, coef * &c_inv)), out_trunc))
    }

    /// Order comparison; see [`Self::compare_flagged`] for the truncation
    /// caveat.
    pub fn compare(&self, other: &Self) -> Ordering {
        self.compare_flagged(other).ordering
    }

    /// Sign of `self - other`. Equality may be an artefact of truncation; the
    /// flag reports when `self` and `other` differ only at exponents at or
    /// above the shared truncation order.
    pub fn compare_flagged(&self, other: &Self) -> CompareOutcome {
        let diff = self - other;
        let ordering = diff.signum().cmp(&0);
        let truncated = ordering == Ordering::Equal && {
            let t = diff.trunc;
            let high = |s: &Self| -> Vec<(Exponent, BigRational)> {
                s.terms.iter().filter(|(q, _)| *q >= t).cloned().collect()
            };
            high(self) != high(other)
        };
        CompareOutcome { ordering, truncated }
    }

    /// Zero, or of positive valuation: smaller in absolute value than every
    /// positive rational.
    pub fn is_infinitesimal(&self) -> bool {
        self.valuation().is_none_or(|v| v > Exponent::zero())
    }

    /// `sum c_i t^{q_i}` in machine arithmetic.
    pub fn evaluate_at(&self, t: f64) -> Result<f64, RcfError> {
        if !(t > 0.0) {
            return Err(RcfError::NonPositiveParameter(t));
        }
        let mut s = 0.0;
        for (q, c) in &self.terms {
            let c = c.to_f64().unwrap_or(f64::NAN);
            let p = if *q.denom() == 1 {
                i32::try_from(*q.numer()).map_or_else(|_| t.powf(*q.numer() as f64), |e| t.powi(e))
            } else {
                t.powf(*q.numer() as f64 / *q.denom() as f64)
            };
            s += c * p;
        }
        if s.is_finite() {
            Ok(s)
        } else {
            Err(RcfError::Overflow { t })
        }
    }

    fn add_impl(&self, other: &Self, negate_other: bool) -> Self {
        let trunc = self.trunc.min(other.trunc);
        let rhs = other.terms.iter().map(|(q, c)| (*q, if negate_other { -c.clone() } else { c.clone() }));
        Self::from_terms(self.terms.iter().cloned().chain(rhs), trunc)
    }

    fn mul_impl(&self, other: &Self) -> Self {
        let cross = min_opt(other.valuation().map(|v| self.trunc + v), self.valuation().map(|v| other.trunc + v));
        let cap = self.trunc.min(other.trunc);
        let trunc = cross.map_or(cap, |c| c.min(cap));
        PuiseuxSeries { terms: mul_terms(&self.terms, &other.terms, trunc), trunc }
    }
}

impl PartialEq for PuiseuxSeries {
    /// Structural equality of the known terms (truncation orders ignored).
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl $tr<&PuiseuxSeries> for &PuiseuxSeries {
            type Output = PuiseuxSeries;
            fn $m(self, rhs: &PuiseuxSeries) -> PuiseuxSeries {
                let f: fn(&PuiseuxSeries, &PuiseuxSeries) -> PuiseuxSeries = $body;
                f(self, rhs)
            }
        }
        impl $tr<PuiseuxSeries> for PuiseuxSeries {
            type Output = PuiseuxSeries;
            fn $m(self, rhs: PuiseuxSeries) -> PuiseuxSeries {
                <&PuiseuxSeries as $tr<&PuiseuxSeries>>::$m(&self, &rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| a.add_impl(b, false));
binop!(Sub, sub, |a, b| a.add_impl(b, true));
binop!(Mul, mul, |a, b| a.mul_impl(b));

impl Neg for &PuiseuxSeries {
    type Output = PuiseuxSeries;
    fn neg(self) -> PuiseuxSeries {
        PuiseuxSeries { terms: self.terms.iter().map(|(q, c)| (*q, -c.clone())).collect(), trunc: self.trunc }
    }
}

impl Neg for PuiseuxSeries {
    type Output = PuiseuxSeries;
    fn neg(self) -> PuiseuxSeries {
        -&self
    }
}

impl Scalar for PuiseuxSeries {
    fn constant(c: &Constant, like: &Self) -> Self {
        Self::from_rational(c.exact().clone(), like.trunc)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
}

fn fmt_ratio(q: &Exponent) -> String {
    if *q.denom() == 1 {
        q.numer().to_string()
    } else {
        format!("({}/{})", q.numer(), q.denom())
    }
}

impl fmt::Display for PuiseuxSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            write!(f, "0")?;
        }
        for (i, (q, c)) in self.terms.iter().enumerate() {
            let sign = if c.is_negative() { "-" } else { "+" };
            if i == 0 {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let mag = c.abs();
            let coef =
                if mag.is_integer() { mag.numer().to_string() } else { format!("({}/{})", mag.numer(), mag.denom()) };
            match (q.is_zero(), mag.is_one()) {
                (true, _) => f.write_str(&coef)?,
                (false, true) => write!(f, "T^{}", fmt_ratio(q))?,
                (false, false) => write!(f, "{coef}*T^{}", fmt_ratio(q))?,
            }
        }
        write!(f, " + O(T^{})", fmt_ratio(&self.trunc))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> Exponent {
        Ratio::new(p, d)
    }

    fn r(p: i64) -> BigRational {
        BigRational::from_integer(p.into())
    }

    fn series(terms: &[(i64, i64, i64)], trunc: i64) -> PuiseuxSeries {
        PuiseuxSeries::from_terms(terms.iter().map(|&(p, d, c)| (q(p, d), r(c))), q(trunc, 1))
    }

    #[test]
    fn half_powers_multiply() {
        let h = series(&[(1, 2, 1)], 16);
        assert_eq!(&h * &h, series(&[(1, 1, 1)], 16));
    }

    #[test]
    fn cancellation() {
        let a = series(&[(0, 1, 1), (1, 1, 1)], 16);
        let b = series(&[(0, 1, -1)], 16);
        assert_eq!(&a + &b, series(&[(1, 1, 1)], 16));
    }

    #[test]
    fn truncated_product() {
        let a = series(&[(0, 1, 1), (1, 1, -1)], 4);
        let b = series(&[(0, 1, 1), (1, 1, 1), (2, 1, 1), (3, 1, 1)], 4);
        let p = &a * &b;
        assert_eq!(p, PuiseuxSeries::one(q(4, 1)));
        assert_eq!(p.trunc_order(), q(4, 1));
    }

    #[test]
    fn geometric_inverse() {
        let a = series(&[(0, 1, 1), (1, 1, -1)], 4);
        let inv = a.inv().unwrap();
        assert_eq!(inv, series(&[(0, 1, 1), (1, 1, 1), (2, 1, 1), (3, 1, 1)], 4));
    }

    #[test]
    fn monomial_inverse() {
        let t = PuiseuxSeries::t();
        let inv = t.inv().unwrap();
        assert_eq!(inv.terms(), &[(q(-1, 1), r(1))]);
        assert_eq!(PuiseuxSeries::zero(q(4, 1)).inv(), Err(RcfError::DivisionByZero));
    }

    #[test]
    fn ordering() {
        let t = PuiseuxSeries::t();
        let two_t2 = series(&[(2, 1, 2)], 16);
        assert_eq!(t.compare(&two_t2), Ordering::Greater);
        let one_plus_t = series(&[(0, 1, 1), (1, 1, 1)], 16);
        assert_eq!(one_plus_t.compare(&PuiseuxSeries::one(q(16, 1))), Ordering::Greater);
        assert_eq!(one_plus_t.compare(&one_plus_t), Ordering::Equal);
        assert!(!one_plus_t.compare_flagged(&one_plus_t).truncated);
    }

    #[test]
    fn truncation_flag() {
        // 1 + T^5 vs 1 at a shared order of 4: equal only because of truncation
        let a = series(&[(0, 1, 1), (5, 1, 1)], 8);
        let b = series(&[(0, 1, 1)], 4);
        let out = a.compare_flagged(&b);
        assert_eq!(out, CompareOutcome { ordering: Ordering::Equal, truncated: true });
    }

    #[test]
    fn valuations() {
        assert_eq!(series(&[(1, 1, 3), (2, 1, -1)], 16).valuation(), Some(q(1, 1)));
        assert_eq!(PuiseuxSeries::zero(q(16, 1)).valuation(), None);
        assert_eq!(series(&[(-1, 2, 1), (0, 1, 1)], 16).valuation(), Some(q(-1, 2)));
    }

    #[test]
    fn infinitesimals() {
        assert!(series(&[(1, 1, 3), (2, 1, -1)], 16).is_infinitesimal());
        assert!(!series(&[(0, 1, 1), (1, 1, 1)], 16).is_infinitesimal());
        assert!(PuiseuxSeries::zero(q(16, 1)).is_infinitesimal());
    }

    #[test]
    fn numeric_evaluation() {
        let s = series(&[(1, 1, 1), (2, 1, 1)], 16);
        assert!((s.evaluate_at(0.1).unwrap() - 0.11).abs() < 1e-15);
        assert_eq!(PuiseuxSeries::one(q(16, 1)).evaluate_at(0.37).unwrap(), 1.0);
        let inv_t = series(&[(-1, 1, 1)], 16);
        assert!((inv_t.evaluate_at(0.01).unwrap() - 100.0).abs() < 1e-12);
        assert!(matches!(s.evaluate_at(0.0), Err(RcfError::NonPositiveParameter(_))));
        let huge = series(&[(-400, 1, 1)], 16);
        assert!(matches!(huge.evaluate_at(0.01), Err(RcfError::Overflow { .. })));
    }

    #[test]
    fn mul_truncation_rule() {
        // T (order 4) times T^{-1} (order 4): min(4 - 1, 4 + 1, 4) = 3
        let a = series(&[(1, 1, 1)], 4);
        let b = series(&[(-1, 1, 1)], 4);
        assert_eq!((&a * &b).trunc_order(), q(3, 1));
        // multiplying by zero keeps the smaller order
        let z = PuiseuxSeries::zero(q(6, 1));
        assert_eq!((&a * &z).trunc_order(), q(4, 1));
    }

    #[test]
    fn display() {
        let s = series(&[(-1, 2, 1), (0, 1, -3), (2, 1, 2)], 4);
        assert_eq!(s.to_string(), "T^(-1/2) - 3 + 2*T^2 + O(T^4)");
    }
}
