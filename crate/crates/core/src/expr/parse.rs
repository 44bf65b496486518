//! Recursive-descent parser for polynomial maps.
//!
//! Precedence, tightest first: `^`, unary `-`, `* /`, `+ -`. Exponents must
//! be non-negative integer literals and a divisor must be a nonzero constant.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::Expr;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("undeclared variable {name:?} at offset {offset}")]
    UndeclaredVariable { name: String, offset: usize },
    #[error("bad exponent at offset {offset}: {message}")]
    BadExponent { offset: usize, message: String },
    #[error("divisor at offset {offset} must be a nonzero constant")]
    BadDivisor { offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::UndeclaredVariable { offset, .. }
            | ParseError::BadExponent { offset, .. }
            | ParseError::BadDivisor { offset } => *offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num { value: BigRational, integer: bool },
    Ident(String),
    Op(char),
    End,
}

struct Lexer;

impl Lexer {
    fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
        let bytes = text.as_bytes();
        let mut out = Vec::new();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i] as char;
            if c.is_ascii_whitespace() {
                i += 1;
            } else if c.is_ascii_digit() || (c == '.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let int_part = &text[start..i];
                let mut frac_part = "";
                let mut integer = true;
                if i < bytes.len() && bytes[i] == b'.' {
                    integer = false;
                    i += 1;
                    let fs = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    frac_part = &text[fs..i];
                }
                let digits = format!("{int_part}{frac_part}");
                let numer: BigInt = if digits.is_empty() {
                    return Err(ParseError::Syntax { offset: start, message: "malformed number".into() });
                } else {
                    digits.parse().expect("ascii digits")
                };
                let denom = num_traits::pow(BigInt::from(10), frac_part.len());
                out.push((Tok::Num { value: BigRational::new(numer, denom), integer }, start));
            } else if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
            } else if "+-*/^();".contains(c) {
                out.push((Tok::Op(c), i));
                i += 1;
            } else {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(ParseError::Syntax { offset: i, message: format!("unexpected character {ch:?}") });
            }
        }
        out.push((Tok::End, text.len()));
        Ok(out)
    }
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    vars: &'a [String],
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, op: char) -> bool {
        if *self.peek() == Tok::Op(op) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        let found = match self.peek() {
            Tok::End => "end of input".to_string(),
            Tok::Op(c) => format!("{c:?}"),
            Tok::Ident(s) => format!("identifier {s:?}"),
            Tok::Num { .. } => "number".to_string(),
        };
        ParseError::Syntax { offset: self.offset(), message: format!("expected {wanted}, found {found}") }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                let rhs = self.term()?;
                lhs = Expr::Add(Box::new(lhs), Box::new(rhs));
            } else if self.eat('-') {
                let rhs = self.term()?;
                lhs = Expr::Sub(Box::new(lhs), Box::new(rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                let rhs = self.unary()?;
                lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
            } else if *self.peek() == Tok::Op('/') {
                self.bump();
                let at = self.offset();
                let rhs = self.unary()?;
                match rhs.fold_constant() {
                    Some(c) if !c.is_zero() => {
                        lhs = match lhs.as_constant() {
                            Some(a) => Expr::constant(a / c),
                            None => Expr::Mul(Box::new(lhs), Box::new(Expr::constant(c.recip()))),
                        };
                    }
                    _ => return Err(ParseError::BadDivisor { offset: at }),
                }
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            let inner = self.unary()?;
            return Ok(match inner.as_constant() {
                Some(c) => Expr::constant(-c),
                None => Expr::Neg(Box::new(inner)),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let mut base = self.primary()?;
        while self.eat('^') {
            let at = self.offset();
            let before = self.pos;
            match self.bump() {
                (Tok::Op('-'), _) => {
                    return Err(ParseError::BadExponent { offset: at, message: "negative exponent".into() })
                }
                (Tok::Num { value, integer: true }, _) => {
                    let e = value
                        .to_integer()
                        .to_u32()
                        .ok_or_else(|| ParseError::BadExponent { offset: at, message: "exponent too large".into() })?;
                    base = Expr::Pow(Box::new(base), e);
                }
                (Tok::Num { .. }, _) => {
                    return Err(ParseError::BadExponent { offset: at, message: "non-integer exponent".into() })
                }
                _ => {
                    self.pos = before;
                    return Err(self.unexpected("integer exponent"));
                }
            }
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let at = self.offset();
        match self.peek().clone() {
            Tok::Num { value, .. } => {
                self.bump();
                Ok(Expr::constant(value))
            }
            Tok::Ident(name) => {
                self.bump();
                match self.vars.iter().position(|v| *v == name) {
                    Some(i) => Ok(Expr::Var(i)),
                    None => Err(ParseError::UndeclaredVariable { name, offset: at }),
                }
            }
            Tok::Op('(') => {
                self.bump();
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(self.unexpected("')'"));
                }
                Ok(e)
            }
            _ => Err(self.unexpected("expression")),
        }
    }
}

pub(crate) fn parse_components(text: &str, vars: &[String]) -> Result<Vec<Expr>, ParseError> {
    let toks = Lexer::tokenize(text)?;
    let mut p = Parser { toks, pos: 0, vars };
    let mut comps = vec![p.expr()?];
    while p.eat(';') {
        comps.push(p.expr()?);
    }
    if *p.peek() != Tok::End {
        return Err(p.unexpected("';' or end of input"));
    }
    Ok(comps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vars(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    fn parse1(s: &str) -> Result<Expr, ParseError> {
        parse_components(s, &vars(&["x", "y"])).map(|mut v| v.remove(0))
    }

    #[test]
    fn trailing_operator() {
        let err = parse1("x + ").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { offset: 4, .. }), "{err:?}");
    }

    #[test]
    fn undeclared() {
        let err = parse1("x + z").unwrap_err();
        assert_eq!(err, ParseError::UndeclaredVariable { name: "z".into(), offset: 4 });
    }

    #[test]
    fn exponents() {
        assert!(matches!(parse1("x^-1"), Err(ParseError::BadExponent { offset: 2, .. })));
        assert!(matches!(parse1("x^1.5"), Err(ParseError::BadExponent { offset: 2, .. })));
        assert!(matches!(parse1("x^y"), Err(ParseError::Syntax { offset: 2, .. })));
        assert_eq!(parse1("x^0").unwrap(), Expr::Pow(Box::new(Expr::Var(0)), 0));
    }

    #[test]
    fn precedence() {
        // -x^2 is -(x^2)
        let e = parse1("-x^2").unwrap();
        assert_eq!(e.eval(&[3.0, 0.0], &0.0), -9.0);
        // unary minus binds tighter than *
        assert_eq!(parse1("2*-x").unwrap().eval(&[3.0, 0.0], &0.0), -6.0);
        assert_eq!(parse1("1 - 2 - 3").unwrap().eval(&[0.0, 0.0], &0.0), -4.0);
        assert_eq!(parse1("2*x^2*y + 1").unwrap().eval(&[2.0, 3.0], &0.0), 25.0);
        assert_eq!(parse1("(x + y)^2").unwrap().eval(&[1.0, 2.0], &0.0), 9.0);
    }

    #[test]
    fn division_by_constants_only() {
        assert_eq!(parse1("x/4").unwrap().eval(&[2.0, 0.0], &0.0), 0.5);
        assert_eq!(parse1("x/(2*2)").unwrap().eval(&[2.0, 0.0], &0.0), 0.5);
        assert!(matches!(parse1("x/y"), Err(ParseError::BadDivisor { offset: 2 })));
        assert!(matches!(parse1("x/(1-1)"), Err(ParseError::BadDivisor { .. })));
    }

    #[test]
    fn decimals_are_exact() {
        let e = parse1("0.1").unwrap();
        assert_eq!(e.as_constant().unwrap(), &BigRational::new(1.into(), 10.into()));
    }

    #[test]
    fn components_and_garbage() {
        assert_eq!(parse_components("x; y; x*y", &vars(&["x", "y"])).unwrap().len(), 3);
        assert!(matches!(parse1("x;"), Err(ParseError::Syntax { offset: 2, .. })));
        assert!(matches!(parse1("x y"), Err(ParseError::Syntax { offset: 2, .. })));
        assert!(matches!(parse1("(x"), Err(ParseError::Syntax { offset: 2, .. })));
        assert!(matches!(parse1("x $ 1"), Err(ParseError::Syntax { offset: 2, .. })));
    }
}
