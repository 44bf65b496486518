//! `puiseux` subcommand: evaluates `{"op": ..., "args": [...]}` trees whose
//! leaves are term lists `[[exponent, coefficient], ...]`.
//!
//! Numbers may be JSON numbers or strings such as `"-1/2"`. Series-valued
//! ops: `add`, `sub`, `mul` (n-ary), `neg`, `inv`, `abs`. Other ops:
//! `compare` (two args), `evaluate` (with `"t"`), `infinitesimal`, and
//! `in_subgroup` (with `"threshold"` and optional `"mode"`).

use std::io::Read;
use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use serde_json::{json, Value};

use sardkit::rcf::{
    parse_exponent, parse_rational, ConvexSubgroup, Exponent, PuiseuxSeries, SubgroupMode, DEFAULT_TRUNC,
};

use super::{emit, read_text, CliError, Common};

#[derive(Debug, Args, Serialize)]
pub(crate) struct PuiseuxArgs {
    /// Expression file; standard input when absent
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Truncation order given to every leaf
    #[arg(long, default_value_t = DEFAULT_TRUNC)]
    pub trunc: i64,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

pub(crate) fn run(a: &PuiseuxArgs) -> Result<(), CliError> {
    let text = match &a.input {
        Some(p) => read_text(p)?,
        None => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| CliError::Usage(format!("cannot read standard input: {e}")))?;
            s
        }
    };
    let expr: Value = serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("expression: {e}")))?;
    let result = evaluate(&expr, Exponent::from_integer(a.trunc))?;
    emit("puiseux", a, a.common.out.as_deref(), result)
}

/// Evaluate a whole expression to its JSON result.
pub(crate) fn evaluate(expr: &Value, trunc: Exponent) -> Result<Value, CliError> {
    let Some(op) = expr.get("op").and_then(Value::as_str) else {
        return Ok(describe(&series(expr, trunc)?));
    };
    let args = args_of(expr)?;
    let one = || -> Result<PuiseuxSeries, CliError> {
        match args {
            [x] => series(x, trunc),
            _ => Err(CliError::Parse(format!("{op} takes one argument"))),
        }
    };
    match op {
        "compare" => {
            let [a, b] = args else {
                return Err(CliError::Parse("compare takes two arguments".into()));
            };
            let out = series(a, trunc)?.compare_flagged(&series(b, trunc)?);
            let ordering = match out.ordering {
                std::cmp::Ordering::Less => "less",
                std::cmp::Ordering::Equal => "equal",
                std::cmp::Ordering::Greater => "greater",
            };
            Ok(json!({ "ordering": ordering, "truncated": out.truncated }))
        }
        "evaluate" => {
            let t = expr
                .get("t")
                .and_then(Value::as_f64)
                .ok_or_else(|| CliError::Parse("evaluate needs a numeric \"t\"".into()))?;
            Ok(json!({ "t": t, "value": one()?.evaluate_at(t)? }))
        }
        "infinitesimal" => Ok(json!({ "infinitesimal": one()?.is_infinitesimal() })),
        "in_subgroup" => {
            let threshold = expr
                .get("threshold")
                .ok_or_else(|| CliError::Parse("in_subgroup needs \"threshold\"".into()))
                .and_then(|v| Ok(parse_exponent(&number_text(v)?)?))?;
            let mode = match expr.get("mode").and_then(Value::as_str).unwrap_or("val_gt") {
                "val_gt" => SubgroupMode::ValGt,
                "val_ge" => SubgroupMode::ValGe,
                m => return Err(CliError::Parse(format!("unknown subgroup mode {m:?}"))),
            };
            let g = ConvexSubgroup::new(threshold, mode);
            Ok(json!({ "contains": g.contains(&one()?) }))
        }
        _ => Ok(describe(&series(expr, trunc)?)),
    }
}

fn args_of(expr: &Value) -> Result<&[Value], CliError> {
    expr.get("args")
        .and_then(Value::as_array)
        .map(Vec::as_slice)
        .ok_or_else(|| CliError::Parse("operation without an \"args\" list".into()))
}

fn series(expr: &Value, trunc: Exponent) -> Result<PuiseuxSeries, CliError> {
    if let Some(terms) = expr.as_array() {
        let mut out = Vec::with_capacity(terms.len());
        for t in terms {
            let pair = t
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| CliError::Parse(format!("term {t} is not an [exponent, coefficient] pair")))?;
            out.push((parse_exponent(&number_text(&pair[0])?)?, parse_rational(&number_text(&pair[1])?)?));
        }
        return Ok(PuiseuxSeries::from_terms(out, trunc));
    }
    let op = expr
        .get("op")
        .and_then(Value::as_str)
        .ok_or_else(|| CliError::Parse(format!("{expr} is neither a term list nor an operation")))?;
    let args = args_of(expr)?.iter().map(|a| series(a, trunc)).collect::<Result<Vec<_>, CliError>>()?;
    let unary = |name: &str| -> Result<&PuiseuxSeries, CliError> {
        match args.as_slice() {
            [x] => Ok(x),
            _ => Err(CliError::Parse(format!("{name} takes one argument"))),
        }
    };
    let fold = |f: fn(&PuiseuxSeries, &PuiseuxSeries) -> PuiseuxSeries| -> Result<PuiseuxSeries, CliError> {
        let (first, rest) = args.split_first().ok_or_else(|| CliError::Parse(format!("{op} needs arguments")))?;
        Ok(rest.iter().fold(first.clone(), |acc, x| f(&acc, x)))
    };
    match op {
        "add" => fold(|a, b| a + b),
        "sub" => fold(|a, b| a - b),
        "mul" => fold(|a, b| a * b),
        "neg" => unary(op).map(|x| -x),
        "abs" => Ok(unary(op)?.abs()),
        "inv" => Ok(unary(op)?.inv()?),
        _ => Err(CliError::Parse(format!("unknown or non-series operation {op:?}"))),
    }
}

fn number_text(v: &Value) -> Result<String, CliError> {
    match v {
        Value::Number(n) => Ok(n.to_string()),
        Value::String(s) => Ok(s.clone()),
        _ => Err(CliError::Parse(format!("{v} is not a number"))),
    }
}

fn describe(s: &PuiseuxSeries) -> Value {
    let terms: Vec<[String; 2]> = s.terms().iter().map(|(q, c)| [q.to_string(), c.to_string()]).collect();
    json!({
        "terms": terms,
        "valuation": s.valuation().map(|v| v.to_string()),
        "trunc": s.trunc_order().to_string(),
        "display": s.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(text: &str) -> Value {
        evaluate(&serde_json::from_str(text).unwrap(), Exponent::from_integer(DEFAULT_TRUNC)).unwrap()
    }

    #[test]
    fn product_and_valuation() {
        let v = eval(r#"{"op": "mul", "args": [[[1, 1], [0, 1]], [[1, 1], [0, -1]]]}"#);
        assert_eq!(v["terms"], json!([["0", "-1"], ["2", "1"]]));
        assert_eq!(v["valuation"], json!("0"));
    }

    #[test]
    fn inverse_of_one_plus_t() {
        let v = evaluate(
            &serde_json::from_str(r#"{"op": "inv", "args": [[[0, 1], [1, 1]]]}"#).unwrap(),
            Exponent::from_integer(4),
        )
        .unwrap();
        assert_eq!(v["terms"], json!([["0", "1"], ["1", "-1"], ["2", "1"], ["3", "-1"]]));
        assert_eq!(v["trunc"], json!("4"));
    }

    #[test]
    fn comparisons_and_subgroups() {
        let v = eval(r#"{"op": "compare", "args": [[[1, 1]], [[0, "1/1000"]]]}"#);
        assert_eq!(v["ordering"], json!("less"));
        let v = eval(r#"{"op": "in_subgroup", "threshold": 2, "args": [[[3, 1]]]}"#);
        assert_eq!(v["contains"], json!(true));
        let v = eval(r#"{"op": "in_subgroup", "threshold": 2, "args": [[[2, 1]]]}"#);
        assert_eq!(v["contains"], json!(false));
        let v = eval(r#"{"op": "evaluate", "t": 0.5, "args": [[["1/2", 2], [1, "0.5"]]]}"#);
        assert!((v["value"].as_f64().unwrap() - (2.0 * 0.5f64.sqrt() + 0.25)).abs() < 1e-12);
    }

    #[test]
    fn malformed() {
        let bad = |s: &str| evaluate(&serde_json::from_str(s).unwrap(), Exponent::from_integer(4)).is_err();
        assert!(bad(r#"{"op": "mul"}"#));
        assert!(bad(r#"{"op": "frobnicate", "args": []}"#));
        assert!(bad(r#"[[1]]"#));
        assert!(bad(r#"{"op": "inv", "args": [[]]}"#));
        assert!(bad(r#"{"op": "neg", "args": [[[1, 1]], [[1, 1]]]}"#));
    }
}
