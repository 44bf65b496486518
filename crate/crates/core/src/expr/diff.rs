//! Symbolic differentiation with shallow simplification.

use num_traits::{One, Zero};

use super::Expr;

fn is_zero(e: &Expr) -> bool {
    e.as_constant().is_some_and(|c| c.is_zero())
}

fn is_one(e: &Expr) -> bool {
    e.as_constant().is_some_and(|c| c.is_one())
}

pub(crate) fn add(a: Expr, b: Expr) -> Expr {
    match (a.as_constant(), b.as_constant()) {
        (Some(x), Some(y)) => Expr::constant(x + y),
        _ if is_zero(&a) => b,
        _ if is_zero(&b) => a,
        _ => Expr::Add(Box::new(a), Box::new(b)),
    }
}

pub(crate) fn sub(a: Expr, b: Expr) -> Expr {
    match (a.as_constant(), b.as_constant()) {
        (Some(x), Some(y)) => Expr::constant(x - y),
        _ if is_zero(&b) => a,
        _ if is_zero(&a) => neg(b),
        _ => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

pub(crate) fn mul(a: Expr, b: Expr) -> Expr {
    match (a.as_constant(), b.as_constant()) {
        (Some(x), Some(y)) => Expr::constant(x * y),
        _ if is_zero(&a) || is_zero(&b) => Expr::int(0),
        _ if is_one(&a) => b,
        _ if is_one(&b) => a,
        _ => Expr::Mul(Box::new(a), Box::new(b)),
    }
}

pub(crate) fn neg(a: Expr) -> Expr {
    match a {
        Expr::Const(c) => Expr::constant(-c.exact().clone()),
        Expr::Neg(inner) => *inner,
        other => Expr::Neg(Box::new(other)),
    }
}

pub(crate) fn pow(a: Expr, e: u32) -> Expr {
    match e {
        0 => Expr::int(1),
        1 => a,
        _ => match a.as_constant() {
            Some(c) => Expr::constant(num_traits::pow(c.clone(), e as usize)),
            None => Expr::Pow(Box::new(a), e),
        },
    }
}

/// d e / d x_var.
pub(crate) fn derivative(e: &Expr, var: usize) -> Expr {
    match e {
        Expr::Var(i) => Expr::int(if *i == var { 1 } else { 0 }),
        Expr::Const(_) => Expr::int(0),
        Expr::Add(a, b) => add(derivative(a, var), derivative(b, var)),
        Expr::Sub(a, b) => sub(derivative(a, var), derivative(b, var)),
        Expr::Mul(a, b) => add(mul(derivative(a, var), (**b).clone()), mul((**a).clone(), derivative(b, var))),
        Expr::Neg(a) => neg(derivative(a, var)),
        Expr::Pow(a, n) => {
            let da = derivative(a, var);
            if is_zero(&da) || *n == 0 {
                return Expr::int(0);
            }
            mul(mul(Expr::int(*n as i64), pow((**a).clone(), n - 1)), da)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::PolynomialMap;

    #[test]
    fn simplification_rules() {
        let x = Expr::Var(0);
        assert_eq!(mul(Expr::int(0), x.clone()), Expr::int(0));
        assert_eq!(add(x.clone(), Expr::int(0)), x);
        assert_eq!(pow(x.clone(), 0), Expr::int(1));
        assert_eq!(neg(neg(x.clone())), x);
        assert_eq!(add(Expr::int(2), Expr::int(3)), Expr::int(5));
    }

    #[test]
    fn broughton_partials() {
        let m = PolynomialMap::parse("x + x^2*y", &["x", "y"]).unwrap();
        let j = m.jacobian();
        assert_eq!(j.entry(0, 0).display(m.vars()).to_string(), "1 + 2*x*y");
        assert_eq!(j.entry(0, 1).display(m.vars()).to_string(), "x^2");
    }
}
