//! Deterministic JSON output and coefficient files.
//!
//! Object keys are sorted, floats are written with 17 significant digits and
//! non-finite floats become `null`, so identical inputs give identical bytes.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde_json::{json, Map, Number, Value};

use crate::bases::BasisFamily;
use crate::error::{Error, Result};
use crate::model::{CheckReport, DilIndex, FCoordVec, GCoordVec, Sign, TransIndex};

pub const SCHEMA_VERSION: u64 = 1;

/// Float as a JSON value; NaN and infinities become `null`.
pub fn num(v: f64) -> Value {
    Number::from_f64(v).map(Value::Number).unwrap_or(Value::Null)
}

pub fn complex(c: Complex64) -> Value {
    Value::Array(vec![num(c.re), num(c.im)])
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |out: &mut String, n: usize| out.extend(std::iter::repeat(' ').take(n));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                let _ = write!(out, "{i}");
            } else if let Some(u) = n.as_u64() {
                let _ = write!(out, "{u}");
            } else {
                let f = n.as_f64().unwrap_or(f64::NAN);
                if f.is_finite() {
                    let _ = write!(out, "{f:.16e}");
                } else {
                    out.push_str("null");
                }
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(a) => {
            if a.is_empty() {
                out.push_str("[]");
                return;
            }
            if a.iter().all(|x| !x.is_object() && !x.is_array()) {
                out.push('[');
                for (i, x) in a.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, x, indent);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (i, x) in a.iter().enumerate() {
                pad(out, indent + 2);
                write_value(out, x, indent + 2);
                if i + 1 < a.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(m) => {
            if m.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                pad(out, indent + 2);
                out.push_str(&Value::String((*k).clone()).to_string());
                out.push_str(": ");
                write_value(out, &m[*k], indent + 2);
                if i + 1 < keys.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

/// Canonical text of `v`, newline terminated.
pub fn to_canonical_string(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

/// Adds `schema_version` to a top-level object.
pub fn document(mut v: Value) -> Value {
    if let Value::Object(m) = &mut v {
        m.insert("schema_version".into(), Value::from(SCHEMA_VERSION));
    }
    v
}

pub fn report_value(r: &CheckReport) -> Value {
    serde_json::to_value(r).unwrap_or(Value::Null)
}

pub fn f_coords_value(v: &FCoordVec, family: BasisFamily, tail_sq: f64) -> Value {
    let entries: Vec<Value> = v
        .iter()
        .map(|(t, c)| json!({"i_or_j": t.label, "n_or_m": t.n, "re": num(c.re), "im": num(c.im)}))
        .collect();
    document(json!({"model": "F", "basis": family.name(), "entries": entries, "tail_sq": num(tail_sq)}))
}

pub fn g_coords_value(v: &GCoordVec, family: BasisFamily, tail_sq: f64) -> Value {
    let entries: Vec<Value> = v
        .iter()
        .map(|(d, c)| json!({"s": d.sign.as_str(), "i_or_j": d.label, "n_or_m": d.m, "re": num(c.re), "im": num(c.im)}))
        .collect();
    document(json!({"model": "G", "basis": family.name(), "entries": entries, "tail_sq": num(tail_sq)}))
}

/// Coordinates read from a file: either model.
#[derive(Debug, Clone, PartialEq)]
pub enum CoordFile {
    F(BasisFamily, FCoordVec),
    G(BasisFamily, GCoordVec),
}

fn field_i64(e: &Map<String, Value>, k: &str) -> Result<i64> {
    e.get(k).and_then(Value::as_i64).ok_or_else(|| Error::Parse(format!("entry field '{k}' missing or not an integer")))
}

fn field_f64(e: &Map<String, Value>, k: &str) -> Result<f64> {
    match e.get(k) {
        None => Ok(0.0),
        Some(v) => v.as_f64().ok_or_else(|| Error::Parse(format!("entry field '{k}' is not a number"))),
    }
}

pub fn parse_coord_file(text: &str) -> Result<CoordFile> {
    let v: Value = serde_json::from_str(text)?;
    let obj = v.as_object().ok_or_else(|| Error::Parse("coefficient file must be a JSON object".into()))?;
    if let Some(sv) = obj.get("schema_version") {
        if sv.as_u64() != Some(SCHEMA_VERSION) {
            return Err(Error::Parse(format!("unsupported schema_version {sv}")));
        }
    }
    let family = BasisFamily::parse(obj.get("basis").and_then(Value::as_str).ok_or_else(|| Error::Parse("missing 'basis'".into()))?)?;
    let model = obj.get("model").and_then(Value::as_str).ok_or_else(|| Error::Parse("missing 'model'".into()))?;
    let entries = obj.get("entries").and_then(Value::as_array).ok_or_else(|| Error::Parse("missing 'entries' array".into()))?;
    let mut parsed = Vec::with_capacity(entries.len());
    for e in entries {
        let e = e.as_object().ok_or_else(|| Error::Parse("entry must be an object".into()))?;
        let label = field_i64(e, "i_or_j")?;
        family.check_label(label)?;
        let exp = field_i64(e, "n_or_m")?;
        let c = Complex64::new(field_f64(e, "re")?, field_f64(e, "im")?);
        let sign = e.get("s").and_then(Value::as_str).map(Sign::parse).transpose()?;
        parsed.push((label, exp, sign, c));
    }
    match model {
        "F" | "f" => {
            if parsed.iter().any(|p| p.2.is_some()) {
                return Err(Error::Parse("F-model entries take no 's' field".into()));
            }
            Ok(CoordFile::F(family, parsed.into_iter().map(|(i, n, _, c)| (TransIndex::new(i, n), c)).collect()))
        }
        "G" | "g" => {
            let mut out = GCoordVec::new();
            for (j, m, s, c) in parsed {
                let s = s.ok_or_else(|| Error::Parse("G-model entries need an 's' field".into()))?;
                out.add(DilIndex::new(s, j, m), c);
            }
            Ok(CoordFile::G(family, out))
        }
        other => Err(Error::Parse(format!("unknown model '{other}', expected F or G"))),
    }
}
