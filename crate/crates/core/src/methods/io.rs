//! JSON tableau files.
//!
//! ```json
//! {"name": "PEP(3,2,4)",
//!  "A": [[], ["1/3"], ["-5/48", "15/16"]],
//!  "b": ["1/10", "1/2", "2/5"],
//!  "c": [0, "1/3", "5/6"],
//!  "claimed": [2, 4]}
//! ```
//!
//! Entries are JSON numbers or strings holding a rational (`"p/q"`, integer
//! or decimal). A file whose entries are all integers or strings is read
//! exactly; any non-integer JSON number makes the whole tableau float. `c`
//! and `claimed` are optional.

use std::path::Path;

use serde_json::{json, Number, Value};

use crate::error::{Error, Result};
use crate::scalar::{parse_rational, Coeff, Rational, Scalar};

use super::{ButcherTableau, Tableau};

enum Entry {
    Exact(Rational),
    Float(f64),
}

fn entry(v: &Value, path: &str) -> Result<Entry> {
    match v {
        Value::String(s) => parse_rational(s)
            .map(Entry::Exact)
            .ok_or_else(|| Error::Parse(format!("{path}: cannot read {s:?} as a rational"))),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(Entry::Exact(Rational::from_integer(i.into())))
            } else {
                n.as_f64()
                    .map(Entry::Float)
                    .ok_or_else(|| Error::Parse(format!("{path}: bad number {n}")))
            }
        }
        other => Err(Error::Parse(format!("{path}: expected a number or string, got {other}"))),
    }
}

fn vector(v: Option<&Value>, path: &str) -> Result<Option<Vec<Entry>>> {
    match v {
        None | Some(Value::Null) => Ok(None),
        Some(Value::Array(xs)) => xs
            .iter()
            .enumerate()
            .map(|(i, x)| entry(x, &format!("{path}[{i}]")))
            .collect::<Result<Vec<_>>>()
            .map(Some),
        Some(other) => Err(Error::Parse(format!("{path}: expected an array, got {other}"))),
    }
}

/// Parses a tableau from JSON text.
pub fn from_json(text: &str) -> Result<Tableau> {
    let root: Value = serde_json::from_str(text)?;
    let obj = root
        .as_object()
        .ok_or_else(|| Error::Parse("tableau file must hold a JSON object".into()))?;
    let name = obj
        .get("name")
        .and_then(Value::as_str)
        .unwrap_or("unnamed")
        .to_string();
    let a_rows = match obj.get("A") {
        Some(Value::Array(rows)) => rows
            .iter()
            .enumerate()
            .map(|(i, r)| vector(Some(r), &format!("A[{i}]")).map(Option::unwrap_or_default))
            .collect::<Result<Vec<_>>>()?,
        Some(other) => return Err(Error::Parse(format!("A: expected an array of rows, got {other}"))),
        None => return Err(Error::Parse("missing field \"A\"".into())),
    };
    let b = vector(obj.get("b"), "b")?.ok_or_else(|| Error::Parse("missing field \"b\"".into()))?;
    let c = vector(obj.get("c"), "c")?;
    let claimed = match obj.get("claimed") {
        None | Some(Value::Null) => None,
        Some(v) => {
            let pq: Vec<usize> = serde_json::from_value(v.clone())?;
            match pq.as_slice() {
                [p, q] => Some((*p, *q)),
                _ => return Err(Error::Parse("claimed must be [p, q]".into())),
            }
        }
    };

    let is_float = a_rows
        .iter()
        .flatten()
        .chain(&b)
        .chain(c.iter().flatten())
        .any(|e| matches!(e, Entry::Float(_)));

    let tableau = if is_float {
        let f = |e: Entry| match e {
            Entry::Exact(r) => r.to_f64(),
            Entry::Float(x) => x,
        };
        let a = a_rows.into_iter().map(|r| r.into_iter().map(f).collect()).collect();
        let t = ButcherTableau::new(name, a, b.into_iter().map(f).collect(), c.map(|c| c.into_iter().map(f).collect()))?;
        Tableau::Float(match claimed {
            Some((p, q)) => t.with_claim(p, q),
            None => t,
        })
    } else {
        let f = |e: Entry| match e {
            Entry::Exact(r) => r,
            Entry::Float(_) => unreachable!("float entries were ruled out"),
        };
        let a = a_rows.into_iter().map(|r| r.into_iter().map(f).collect()).collect();
        let t = ButcherTableau::new(name, a, b.into_iter().map(f).collect(), c.map(|c| c.into_iter().map(f).collect()))?;
        Tableau::Exact(match claimed {
            Some((p, q)) => t.with_claim(p, q),
            None => t,
        })
    };
    Ok(tableau)
}

fn exact_value(r: &Rational) -> Value {
    Value::String(r.to_string())
}

fn float_value(x: &f64) -> Value {
    Number::from_f64(*x).map_or(Value::Null, Value::Number)
}

fn layout<S: Coeff>(t: &ButcherTableau<S>, f: impl Fn(&S) -> Value) -> Value {
    let a: Vec<Value> = t
        .a_matrix()
        .iter()
        .enumerate()
        .map(|(i, row)| Value::Array(row[..i].iter().map(&f).collect()))
        .collect();
    let mut v = json!({
        "name": t.name(),
        "A": a,
        "b": t.b().iter().map(&f).collect::<Vec<_>>(),
        "c": t.c().iter().map(&f).collect::<Vec<_>>(),
    });
    if let Some((p, q)) = t.claimed() {
        v["claimed"] = json!([p, q]);
    }
    v
}

/// Serializes a tableau; exact entries are written as rational strings so
/// reading the file back gives the same tableau.
pub fn to_json(t: &Tableau) -> String {
    let v = match t {
        Tableau::Exact(t) => layout(t, exact_value),
        Tableau::Float(t) => layout(t, float_value),
    };
    serde_json::to_string_pretty(&v).expect("JSON values always serialize")
}

pub fn read_file(path: impl AsRef<Path>) -> Result<Tableau> {
    from_json(&std::fs::read_to_string(path)?)
}

pub fn write_file(path: impl AsRef<Path>, t: &Tableau) -> Result<()> {
    std::fs::write(path, to_json(t) + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::methods::registry;
    use crate::scalar::rat;

    #[test]
    fn exact_file_with_derived_c() {
        let t = from_json(r#"{"name": "x", "A": [[], ["2/3"]], "b": ["1/4", "3/4"]}"#).unwrap();
        let Tableau::Exact(t) = t else { panic!("expected exact") };
        assert_eq!(t.c()[1], rat(2, 3));
    }

    #[test]
    fn any_float_makes_float() {
        let t = from_json(r#"{"name": "x", "A": [[0], [0.5, 0]], "b": [0, 1]}"#).unwrap();
        assert!(!t.is_exact());
    }

    #[test]
    fn round_trips_are_lossless() {
        for t in registry::registry() {
            let back = from_json(&to_json(&t)).unwrap();
            assert_eq!(back, t, "{}", t.name());
        }
    }

    #[test]
    fn malformed_entries() {
        assert!(from_json(r#"{"A": [[], ["x"]], "b": [0, 1]}"#).is_err());
        assert!(from_json(r#"{"A": [[]], "b": []}"#).is_err());
        assert!(from_json(r#"[1, 2]"#).is_err());
    }
}
