//! JSON spec files.
//!
//! ```json
//! {
//!   "dim": 3,
//!   "labels": ["x", "y", "z"],
//!   "brackets": [[1, 2, 3, "1"], [2, 1, 3, "-1"]],
//!   "derivations": [[["1","0","0"], ["0","1","0"], ["0","0","2"]]]
//! }
//! ```
//!
//! Bracket indices are 1-based and taken literally: `[i, j, k, c]` sets the
//! coefficient of `e_k` in `[e_i, e_j]`, so both orders must be listed.
//! Derivation matrices are row-major with entry `(i, j)` the coefficient of
//! `e_i` in `D e_j`.

use crate::algebra::spec::LieAlgebraSpec;
use crate::error::{Error, Result};
use crate::linalg::QMatrix;
use crate::rational::{fmt_rational, parse_rational, Q};
use serde_json::{json, Value};

fn perr(field: impl Into<String>, msg: impl Into<String>) -> Error {
    Error::Parse {
        field: field.into(),
        msg: msg.into(),
    }
}

fn rational_at(v: &Value, field: &str) -> Result<Q> {
    let text = match v {
        Value::String(s) => s.clone(),
        Value::Number(n) if n.is_i64() => n.to_string(),
        other => return Err(perr(field, format!("expected a \"p/q\" string, found {other}"))),
    };
    parse_rational(&text).map_err(|e| perr(field, format!("{e} in {text:?}")))
}

fn index_at(v: &Value, field: &str, dim: usize) -> Result<usize> {
    let i = v
        .as_u64()
        .ok_or_else(|| perr(field, format!("expected a positive integer index, found {v}")))?
        as usize;
    if i == 0 || i > dim {
        return Err(perr(field, format!("index {i} outside 1..={dim}")));
    }
    Ok(i - 1)
}

/// Line number (1-based) of the first occurrence of `"key"` in `text`.
fn line_of(text: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&needle)).map(|p| p + 1)
}

pub fn parse_spec_str(text: &str) -> Result<LieAlgebraSpec> {
    let root: Value = serde_json::from_str(text).map_err(|e| {
        perr(
            "<document>",
            format!("invalid JSON at line {}, column {}: {e}", e.line(), e.column()),
        )
    })?;
    parse_spec_value(&root).map_err(|e| match e {
        Error::Parse { field, msg } => {
            let top = field.split(['[', '.']).next().unwrap_or("").to_string();
            match line_of(text, &top) {
                Some(l) => Error::Parse {
                    field,
                    msg: format!("{msg} (line {l})"),
                },
                None => Error::Parse { field, msg },
            }
        }
        other => other,
    })
}

pub fn parse_spec_value(root: &Value) -> Result<LieAlgebraSpec> {
    let obj = root
        .as_object()
        .ok_or_else(|| perr("<document>", "top level must be an object"))?;
    let dim = obj
        .get("dim")
        .ok_or_else(|| perr("dim", "missing"))?
        .as_u64()
        .filter(|d| *d > 0)
        .ok_or_else(|| perr("dim", "must be a positive integer"))? as usize;
    let labels = match obj.get("labels") {
        None => LieAlgebraSpec::default_labels(dim),
        Some(Value::Array(xs)) => {
            if xs.len() != dim {
                return Err(perr("labels", format!("has {} entries, expected {dim}", xs.len())));
            }
            xs.iter()
                .enumerate()
                .map(|(i, x)| {
                    x.as_str()
                        .map(str::to_string)
                        .ok_or_else(|| perr(format!("labels[{i}]"), "expected a string"))
                })
                .collect::<Result<Vec<_>>>()?
        }
        Some(_) => return Err(perr("labels", "expected an array of strings")),
    };
    let mut brackets = Vec::new();
    if let Some(b) = obj.get("brackets") {
        let arr = b.as_array().ok_or_else(|| perr("brackets", "expected an array"))?;
        for (t, entry) in arr.iter().enumerate() {
            let f = format!("brackets[{t}]");
            let e = entry
                .as_array()
                .filter(|e| e.len() == 4)
                .ok_or_else(|| perr(&f, "expected [i, j, k, \"p/q\"]"))?;
            brackets.push((
                index_at(&e[0], &f, dim)?,
                index_at(&e[1], &f, dim)?,
                index_at(&e[2], &f, dim)?,
                rational_at(&e[3], &format!("{f}[3]"))?,
            ));
        }
    }
    let mut derivations = Vec::new();
    if let Some(ds) = obj.get("derivations") {
        let arr = ds
            .as_array()
            .ok_or_else(|| perr("derivations", "expected an array of matrices"))?;
        for (m, mat) in arr.iter().enumerate() {
            let f = format!("derivations[{m}]");
            let rows = mat
                .as_array()
                .filter(|r| r.len() == dim)
                .ok_or_else(|| perr(&f, format!("expected {dim} rows")))?;
            let mut out = QMatrix::zeros(dim, dim);
            for (i, row) in rows.iter().enumerate() {
                let row = row
                    .as_array()
                    .filter(|r| r.len() == dim)
                    .ok_or_else(|| perr(format!("{f}[{i}]"), format!("expected {dim} entries")))?;
                for (j, x) in row.iter().enumerate() {
                    out[(i, j)] = rational_at(x, &format!("{f}[{i}][{j}]"))?;
                }
            }
            derivations.push(out);
        }
    }
    LieAlgebraSpec::from_sparse(labels, &brackets, derivations)
}

/// Canonical JSON form: nonzero bracket entries in (i, j, k) order.
pub fn spec_to_value(spec: &LieAlgebraSpec) -> Value {
    let brackets: Vec<Value> = spec
        .sparse_brackets()
        .into_iter()
        .map(|(i, j, k, c)| json!([i + 1, j + 1, k + 1, fmt_rational(&c)]))
        .collect();
    let derivations: Vec<Value> = spec
        .derivations()
        .iter()
        .map(|d| {
            Value::Array(
                (0..d.nrows())
                    .map(|i| Value::Array(d.row(i).iter().map(|x| json!(fmt_rational(x))).collect()))
                    .collect(),
            )
        })
        .collect();
    json!({
        "dim": spec.dim(),
        "labels": spec.labels(),
        "brackets": brackets,
        "derivations": derivations,
    })
}

pub fn spec_to_string(spec: &LieAlgebraSpec) -> String {
    serde_json::to_string_pretty(&spec_to_value(spec)).expect("json values serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_denominator_names_field() {
        let text = r#"{"dim": 1, "derivations": [[["1/0"]]]}"#;
        match parse_spec_str(text) {
            Err(Error::Parse { field, .. }) => assert_eq!(field, "derivations[0][0][0]"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn index_out_of_range() {
        let text = r#"{"dim": 2, "brackets": [[1, 3, 2, "1"]]}"#;
        assert!(matches!(parse_spec_str(text), Err(Error::Parse { .. })));
    }

    #[test]
    fn round_trip() {
        let text = r#"{"dim": 3, "labels": ["x","y","z"],
            "brackets": [[1,2,3,"1"],[2,1,3,"-1"]],
            "derivations": [[["1","0","0"],["0","1/2","0"],["0","0","3/2"]]]}"#;
        let s = parse_spec_str(text).unwrap();
        let again = parse_spec_str(&spec_to_string(&s)).unwrap();
        assert_eq!(spec_to_string(&s), spec_to_string(&again));
    }
}
