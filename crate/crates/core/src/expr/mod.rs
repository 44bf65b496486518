//! Polynomial maps: parsing, symbolic Jacobians and evaluation.
//!
//! A map `f: R^n -> R^k` is written as `k` semicolon-separated polynomial
//! expressions over `n` declared variables, e.g. `"x + x^2*y; y"`. All
//! coefficients are kept as exact rationals; evaluation over `f64`, exact
//! rationals or [`crate::rcf::PuiseuxSeries`] goes through the [`Scalar`]
//! trait.

mod diff;
mod parse;
mod scalar;

use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

pub use parse::ParseError;
pub use scalar::Scalar;

use crate::rabier::OperatorMatrix;

#[derive(Debug, thiserror::Error)]
pub enum ExprError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("dimension mismatch: expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("a map needs at least one variable")]
    NoVariables,
    #[error("invalid variable name {0:?}")]
    InvalidVariable(String),
    #[error("variable {0:?} declared twice")]
    DuplicateVariable(String),
}

/// Exact rational coefficient with a cached `f64` approximation.
#[derive(Clone, Debug)]
pub struct Constant {
    exact: BigRational,
    approx: f64,
}

impl Constant {
    pub fn new(exact: BigRational) -> Self {
        let approx = exact.to_f64().unwrap_or(f64::NAN);
        Constant { exact, approx }
    }

    pub fn from_int(v: i64) -> Self {
        Constant::new(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn exact(&self) -> &BigRational {
        &self.exact
    }

    pub fn approx(&self) -> f64 {
        self.approx
    }

    pub fn is_zero(&self) -> bool {
        self.exact.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.exact.is_one()
    }
}

impl PartialEq for Constant {
    fn eq(&self, other: &Self) -> bool {
        self.exact == other.exact
    }
}

/// Expression tree over the variables of the enclosing map.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Var(usize),
    Const(Constant),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, u32),
}

impl Expr {
    pub fn constant(c: BigRational) -> Expr {
        Expr::Const(Constant::new(c))
    }

    pub fn int(v: i64) -> Expr {
        Expr::Const(Constant::from_int(v))
    }

    pub fn as_constant(&self) -> Option<&BigRational> {
        match self {
            Expr::Const(c) => Some(&c.exact),
            _ => None,
        }
    }

    /// Largest variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Var(i) => Some(*i),
            Expr::Const(_) => None,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => a.max_var().max(b.max_var()),
            Expr::Neg(a) | Expr::Pow(a, _) => a.max_var(),
        }
    }

    /// Exact value if the tree contains no variables.
    pub fn fold_constant(&self) -> Option<BigRational> {
        match self {
            Expr::Var(_) => None,
            Expr::Const(c) => Some(c.exact.clone()),
            Expr::Add(a, b) => Some(a.fold_constant()? + b.fold_constant()?),
            Expr::Sub(a, b) => Some(a.fold_constant()? - b.fold_constant()?),
            Expr::Mul(a, b) => Some(a.fold_constant()? * b.fold_constant()?),
            Expr::Neg(a) => Some(-a.fold_constant()?),
            Expr::Pow(a, e) => Some(num_traits::pow(a.fold_constant()?, *e as usize)),
        }
    }

    /// Evaluate at `point`; variable indices are trusted to be in range.
    pub fn eval<S: Scalar>(&self, point: &[S], like: &S) -> S {
        match self {
            Expr::Var(i) => point[*i].clone(),
            Expr::Const(c) => S::constant(c, like),
            Expr::Add(a, b) => a.eval(point, like).add(&b.eval(point, like)),
            Expr::Sub(a, b) => a.eval(point, like).sub(&b.eval(point, like)),
            Expr::Mul(a, b) => a.eval(point, like).mul(&b.eval(point, like)),
            Expr::Neg(a) => a.eval(point, like).neg(),
            Expr::Pow(a, e) => scalar::pow(&a.eval(point, like), *e, like),
        }
    }

    /// Replace every variable `x_j` by `subs[j]`.
    pub fn substitute(&self, subs: &[Expr]) -> Expr {
        match self {
            Expr::Var(i) => subs[*i].clone(),
            Expr::Const(_) => self.clone(),
            Expr::Add(a, b) => Expr::Add(Box::new(a.substitute(subs)), Box::new(b.substitute(subs))),
            Expr::Sub(a, b) => Expr::Sub(Box::new(a.substitute(subs)), Box::new(b.substitute(subs))),
            Expr::Mul(a, b) => Expr::Mul(Box::new(a.substitute(subs)), Box::new(b.substitute(subs))),
            Expr::Neg(a) => Expr::Neg(Box::new(a.substitute(subs))),
            Expr::Pow(a, e) => Expr::Pow(Box::new(a.substitute(subs)), *e),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Var(_) | Expr::Const(_) => 5,
        }
    }

    pub fn display<'a>(&'a self, vars: &'a [String]) -> ExprDisplay<'a> {
        ExprDisplay { expr: self, vars }
    }
}

/// Re-parseable rendering of an [`Expr`] with named variables.
pub struct ExprDisplay<'a> {
    expr: &'a Expr,
    vars: &'a [String],
}

impl ExprDisplay<'_> {
    fn child(&self, f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
        let d = ExprDisplay { expr: e, vars: self.vars };
        if e.precedence() < min_prec {
            write!(f, "({d})")
        } else {
            write!(f, "{d}")
        }
    }
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.expr {
            Expr::Var(i) => f.write_str(&self.vars[*i]),
            Expr::Const(c) => {
                let r = &c.exact;
                if r.is_integer() && !r.is_negative() {
                    write!(f, "{}", r.numer())
                } else if r.is_integer() {
                    write!(f, "({})", r.numer())
                } else {
                    write!(f, "({}/{})", r.numer(), r.denom())
                }
            }
            Expr::Add(a, b) => {
                self.child(f, a, 1)?;
                f.write_str(" + ")?;
                self.child(f, b, 2)
            }
            Expr::Sub(a, b) => {
                self.child(f, a, 1)?;
                f.write_str(" - ")?;
                self.child(f, b, 2)
            }
            Expr::Mul(a, b) => {
                self.child(f, a, 2)?;
                f.write_str("*")?;
                self.child(f, b, 3)
            }
            Expr::Neg(a) => {
                f.write_str("-")?;
                self.child(f, a, 3)
            }
            Expr::Pow(a, e) => {
                self.child(f, a, 5)?;
                write!(f, "^{e}")
            }
        }
    }
}

/// JSON map file: `{"vars": ["x","y"], "components": ["x + x^2*y"]}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MapFile {
    pub vars: Vec<String>,
    pub components: Vec<String>,
}

/// A polynomial map `R^n -> R^k`.
#[derive(Clone, Debug)]
pub struct PolynomialMap {
    vars: Vec<String>,
    components: Vec<Expr>,
    jacobian: OnceLock<JacobianMap>,
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub(crate) fn check_vars(vars: &[String]) -> Result<(), ExprError> {
    if vars.is_empty() {
        return Err(ExprError::NoVariables);
    }
    for (i, v) in vars.iter().enumerate() {
        if !is_identifier(v) {
            return Err(ExprError::InvalidVariable(v.clone()));
        }
        if vars[..i].contains(v) {
            return Err(ExprError::DuplicateVariable(v.clone()));
        }
    }
    Ok(())
}

impl PolynomialMap {
    /// Parse `text` (components separated by `;`) over the declared `vars`.
    pub fn parse<S: AsRef<str>>(text: &str, vars: &[S]) -> Result<Self, ExprError> {
        let vars: Vec<String> = vars.iter().map(|v| v.as_ref().to_string()).collect();
        check_vars(&vars)?;
        let components = parse::parse_components(text, &vars)?;
        Ok(PolynomialMap { vars, components, jacobian: OnceLock::new() })
    }

    pub fn from_file(file: &MapFile) -> Result<Self, ExprError> {
        let text = file.components.join(";");
        let map = Self::parse(&text, &file.vars)?;
        Ok(map)
    }

    /// Build directly from trees; every variable index must be `< vars.len()`.
    pub fn from_components(vars: Vec<String>, components: Vec<Expr>) -> Result<Self, ExprError> {
        check_vars(&vars)?;
        if components.is_empty() {
            return Err(ParseError::Syntax { offset: 0, message: "no components".into() }.into());
        }
        for c in &components {
            if let Some(i) = c.max_var() {
                if i >= vars.len() {
                    return Err(ExprError::InvalidVariable(format!("#{i}")));
                }
            }
        }
        Ok(PolynomialMap { vars, components, jacobian: OnceLock::new() })
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    /// Domain dimension.
    pub fn n(&self) -> usize {
        self.vars.len()
    }

    /// Codomain dimension.
    pub fn k(&self) -> usize {
        self.components.len()
    }

    /// Symbolic Jacobian, computed once and cached.
    pub fn jacobian(&self) -> &JacobianMap {
        self.jacobian.get_or_init(|| differentiate(self))
    }

    pub fn eval<S: Scalar>(&self, point: &[S]) -> Result<Vec<S>, ExprError> {
        self.check_len(point.len())?;
        let like = &point[0];
        Ok(self.components.iter().map(|c| c.eval(point, like)).collect())
    }

    pub fn eval_f64(&self, point: &[f64]) -> Result<Vec<f64>, ExprError> {
        self.eval(point)
    }

    fn check_len(&self, got: usize) -> Result<(), ExprError> {
        if got != self.n() {
            return Err(ExprError::DimensionMismatch { expected: self.n(), got });
        }
        Ok(())
    }

    /// The map `x -> f(s * x)`, built by substitution.
    pub fn rescale_arguments(&self, s: &BigRational) -> PolynomialMap {
        let subs: Vec<Expr> =
            (0..self.n()).map(|j| Expr::Mul(Box::new(Expr::constant(s.clone())), Box::new(Expr::Var(j)))).collect();
        PolynomialMap {
            vars: self.vars.clone(),
            components: self.components.iter().map(|c| c.substitute(&subs)).collect(),
            jacobian: OnceLock::new(),
        }
    }

    /// Component texts, each re-parseable over [`Self::vars`].
    pub fn component_strings(&self) -> Vec<String> {
        self.components.iter().map(|c| c.display(&self.vars).to_string()).collect()
    }

    pub fn to_file(&self) -> MapFile {
        MapFile { vars: self.vars.clone(), components: self.component_strings() }
    }
}

impl fmt::Display for PolynomialMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.component_strings().join("; "))
    }
}

/// `k x n` grid of partial derivatives, row-major.
#[derive(Clone, Debug)]
pub struct JacobianMap {
    k: usize,
    n: usize,
    entries: Vec<Expr>,
}

impl JacobianMap {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Entry `(i, j)` = d f_i / d x_j.
    pub fn entry(&self, i: usize, j: usize) -> &Expr {
        &self.entries[i * self.n + j]
    }

    pub fn eval<S: Scalar>(&self, point: &[S]) -> Result<Vec<Vec<S>>, ExprError> {
        if point.len() != self.n {
            return Err(ExprError::DimensionMismatch { expected: self.n, got: point.len() });
        }
        let like = &point[0];
        Ok(self.entries.chunks(self.n).map(|row| row.iter().map(|e| e.eval(point, like)).collect()).collect())
    }

    pub fn eval_f64(&self, point: &[f64]) -> Result<OperatorMatrix, ExprError> {
        if point.len() != self.n {
            return Err(ExprError::DimensionMismatch { expected: self.n, got: point.len() });
        }
        let data: Vec<f64> = self.entries.iter().map(|e| e.eval(point, &0.0)).collect();
        Ok(OperatorMatrix::from_row_major(self.k, self.n, data))
    }
}

/// Exact symbolic Jacobian of `map`.
pub fn differentiate(map: &PolynomialMap) -> JacobianMap {
    let n = map.n();
    let entries = map.components.iter().flat_map(|c| (0..n).map(move |j| diff::derivative(c, j))).collect();
    JacobianMap { k: map.k(), n, entries }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(p: i64, q: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }

    #[test]
    fn broughton_eval() {
        let m = PolynomialMap::parse("x + x^2*y", &["x", "y"]).unwrap();
        assert_eq!((m.n(), m.k()), (2, 1));
        assert_eq!(m.eval_f64(&[1.0, 1.0]).unwrap(), vec![2.0]);
        assert_eq!(m.eval_f64(&[2.0, 3.0]).unwrap(), vec![14.0]);
    }

    #[test]
    fn identity_map() {
        let m = PolynomialMap::parse("x; y", &["x", "y"]).unwrap();
        assert_eq!(m.k(), 2);
        assert_eq!(m.eval_f64(&[0.3, -7.0]).unwrap(), vec![0.3, -7.0]);
        for p in [[0.0, 0.0], [3.0, -1.5], [1e3, 2.0]] {
            let j = m.jacobian().eval_f64(&p).unwrap();
            assert_eq!(j.row(0), &[1.0, 0.0]);
            assert_eq!(j.row(1), &[0.0, 1.0]);
        }
    }

    #[test]
    fn broughton_jacobian() {
        let m = PolynomialMap::parse("x + x^2*y", &["x", "y"]).unwrap();
        let j = m.jacobian();
        assert_eq!(j.eval_f64(&[0.0, 0.0]).unwrap().row(0), &[1.0, 0.0]);
        assert_eq!(j.eval_f64(&[1.0, 1.0]).unwrap().row(0), &[3.0, 1.0]);
        // 1 + 2xy and x^2 at a non-trivial point
        assert_eq!(j.eval_f64(&[2.0, -3.0]).unwrap().row(0), &[-11.0, 4.0]);
    }

    #[test]
    fn constant_derivative_is_zero() {
        let m = PolynomialMap::parse("5", &["x", "y", "z"]).unwrap();
        let j = m.jacobian();
        for c in 0..3 {
            assert_eq!(j.entry(0, c), &Expr::int(0));
        }
    }

    #[test]
    fn wrong_length_point() {
        let m = PolynomialMap::parse("x + y", &["x", "y"]).unwrap();
        assert!(matches!(m.eval_f64(&[1.0]), Err(ExprError::DimensionMismatch { expected: 2, got: 1 })));
        assert!(matches!(
            m.jacobian().eval_f64(&[1.0, 2.0, 3.0]),
            Err(ExprError::DimensionMismatch { expected: 2, got: 3 })
        ));
        assert!(m.jacobian().eval::<f64>(&[1.0]).is_err());
    }

    #[test]
    fn exact_rational_eval() {
        let m = PolynomialMap::parse("x/3 + 0.25*y^2", &["x", "y"]).unwrap();
        let v = m.eval(&[rat(1, 1), rat(2, 1)]).unwrap();
        assert_eq!(v[0], rat(4, 3));
    }

    #[test]
    fn display_reparses() {
        let text = "-x^2 + (x - y)*(x + 2*y) - (1/2)*y^3; (x*y)^2 - -x";
        let m = PolynomialMap::parse(text, &["x", "y"]).unwrap();
        let again = PolynomialMap::parse(&m.to_string(), &["x", "y"]).unwrap();
        assert_eq!(m.components(), again.components());
    }

    #[test]
    fn rescaled_map() {
        let m = PolynomialMap::parse("x + x^2*y", &["x", "y"]).unwrap();
        let g = m.rescale_arguments(&rat(2, 1));
        assert_eq!(g.eval_f64(&[0.5, 1.0]).unwrap(), m.eval_f64(&[1.0, 2.0]).unwrap());
    }

    #[test]
    fn bad_variable_lists() {
        assert!(matches!(PolynomialMap::parse("1", &[] as &[&str]), Err(ExprError::NoVariables)));
        assert!(matches!(PolynomialMap::parse("x", &["x", "x"]), Err(ExprError::DuplicateVariable(_))));
        assert!(matches!(PolynomialMap::parse("x", &["2x"]), Err(ExprError::InvalidVariable(_))));
    }
}
