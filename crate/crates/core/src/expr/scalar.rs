use num_rational::BigRational;

use super::Constant;

/// Ring operations needed to evaluate a polynomial.
///
/// `like` is any element of the ring the result should live in; rings with
/// per-element context (the truncation order of a Puiseux series) take it
/// from there.
pub trait Scalar: Clone {
    fn constant(c: &Constant, like: &Self) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
}

impl Scalar for f64 {
    fn constant(c: &Constant, _: &Self) -> Self {
        c.approx()
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

impl Scalar for BigRational {
    fn constant(c: &Constant, _: &Self) -> Self {
        c.exact().clone()
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

/// Square-and-multiply power.
pub(crate) fn pow<S: Scalar>(base: &S, mut e: u32, like: &S) -> S {
    let mut acc: Option<S> = None;
    let mut b = base.clone();
    while e > 0 {
        if e & 1 == 1 {
            acc = Some(match acc {
                Some(a) => a.mul(&b),
                None => b.clone(),
            });
        }
        e >>= 1;
        if e > 0 {
            b = b.mul(&b);
        }
    }
    acc.unwrap_or_else(|| S::constant(&Constant::from_int(1), like))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn powers() {
        for e in 0..12u32 {
            assert_eq!(pow(&1.5f64, e, &0.0), 1.5f64.powi(e as i32));
        }
    }
}
