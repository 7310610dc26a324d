//! JSON rule files.
//!
//! ```json
//! {
//!   "dimension": 1,
//!   "expansion": [{"quadratic": [1, 1, 13]}],
//!   "prototiles": [
//!     {"name": "a", "vertices": [0, {"quadratic": [1, 1, 13]}], "puncture": 0},
//!     {"name": "b", "vertices": [0, 1], "puncture": 0}
//!   ],
//!   "children": [[{"type": "a", "displacement": 0}], [{"type": 0, "displacement": "0"}]],
//!   "seed": "a"
//! }
//! ```
//!
//! Numbers are JSON numbers, decimal strings, or `{"quadratic": [p, q, r]}`
//! for (p + q√r)/2. Points in dimension 1 may be bare numbers. Types are
//! indices or prototile names.

use std::path::Path;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::linalg::LinearMap;

use super::rule::{RawPrototile, SubstitutionRule};

fn parse_error(what: impl Into<String>) -> Error {
    Error::Parse(what.into())
}

/// Parses a number in any of the accepted encodings.
pub fn parse_number(v: &Value) -> Result<f64> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| parse_error(format!("bad number {n}"))),
        Value::String(s) => s.trim().parse::<f64>().map_err(|_| parse_error(format!("bad decimal string {s:?}"))),
        Value::Object(map) => {
            let q = map
                .get("quadratic")
                .and_then(Value::as_array)
                .ok_or_else(|| parse_error("number objects must be {\"quadratic\": [p, q, r]}"))?;
            if q.len() != 3 {
                return Err(parse_error("quadratic expects three entries [p, q, r]"));
            }
            let (p, c, r) = (parse_number(&q[0])?, parse_number(&q[1])?, parse_number(&q[2])?);
            if r < 0.0 {
                return Err(parse_error(format!("quadratic radicand {r} is negative")));
            }
            Ok((p + c * r.sqrt()) / 2.0)
        }
        other => Err(parse_error(format!("expected a number, found {other}"))),
    }
}

fn parse_point(dim: usize, v: &Value) -> Result<Point> {
    match v {
        Value::Array(items) => {
            if items.len() != dim {
                return Err(parse_error(format!("expected a {dim}-vector, found {} entries", items.len())));
            }
            let mut p = [0.0; 2];
            for (slot, item) in p.iter_mut().zip(items) {
                *slot = parse_number(item)?;
            }
            Ok(p)
        }
        scalar if dim == 1 => Ok([parse_number(scalar)?, 0.0]),
        other => Err(parse_error(format!("expected a {dim}-vector, found {other}"))),
    }
}

fn parse_expansion(dim: usize, v: &Value) -> Result<LinearMap> {
    let entries: Vec<f64> = match v {
        Value::Array(items) if items.iter().all(Value::is_array) => {
            if items.len() != dim {
                return Err(parse_error(format!("expansion needs {dim} rows")));
            }
            let mut out = Vec::new();
            for row in items {
                let row = row.as_array().expect("checked");
                if row.len() != dim {
                    return Err(parse_error(format!("expansion rows need {dim} entries")));
                }
                for x in row {
                    out.push(parse_number(x)?);
                }
            }
            out
        }
        Value::Array(items) => items.iter().map(parse_number).collect::<Result<_>>()?,
        scalar if dim == 1 => vec![parse_number(scalar)?],
        other => return Err(parse_error(format!("bad expansion {other}"))),
    };
    if entries.len() != dim * dim {
        return Err(parse_error(format!("expansion needs {} entries, found {}", dim * dim, entries.len())));
    }
    let m = if dim == 1 {
        [[entries[0], 0.0], [0.0, 0.0]]
    } else {
        [[entries[0], entries[1]], [entries[2], entries[3]]]
    };
    LinearMap::new(dim, m)
}

fn parse_type(v: &Value, names: &[String]) -> Result<usize> {
    match v {
        Value::Number(n) => n
            .as_u64()
            .map(|k| k as usize)
            .ok_or_else(|| parse_error(format!("type index {n} is not a non-negative integer"))),
        Value::String(s) => names
            .iter()
            .position(|name| name == s)
            .or_else(|| s.parse::<usize>().ok())
            .ok_or_else(|| parse_error(format!("unknown prototile {s:?}"))),
        other => Err(parse_error(format!("bad type reference {other}"))),
    }
}

fn field<'a>(obj: &'a Value, name: &str) -> Result<&'a Value> {
    obj.get(name).ok_or_else(|| parse_error(format!("missing field `{name}`")))
}

/// Builds a rule from a parsed JSON document. Geometry is not validated here.
pub fn rule_from_value(doc: &Value) -> Result<SubstitutionRule> {
    let dim = field(doc, "dimension")?
        .as_u64()
        .ok_or_else(|| parse_error("`dimension` must be an integer"))? as usize;
    if !(1..=2).contains(&dim) {
        return Err(Error::Dimension(format!("dimension {dim} is not supported (1 or 2)")));
    }
    let expansion = parse_expansion(dim, field(doc, "expansion")?)?;
    let protos = field(doc, "prototiles")?
        .as_array()
        .ok_or_else(|| parse_error("`prototiles` must be an array"))?;
    let mut raw = Vec::with_capacity(protos.len());
    for (i, p) in protos.iter().enumerate() {
        let name = p
            .get("name")
            .and_then(Value::as_str)
            .map(str::to_owned)
            .unwrap_or_else(|| default_name(i));
        let vertices = field(p, "vertices")?
            .as_array()
            .ok_or_else(|| parse_error(format!("prototile {name}: `vertices` must be an array")))?
            .iter()
            .map(|v| parse_point(dim, v))
            .collect::<Result<Vec<_>>>()?;
        let puncture = match p.get("puncture") {
            Some(v) => parse_point(dim, v)?,
            None => [0.0, 0.0],
        };
        raw.push(RawPrototile { name, vertices, puncture });
    }
    let names: Vec<String> = raw.iter().map(|r| r.name.clone()).collect();
    let lists = field(doc, "children")?
        .as_array()
        .ok_or_else(|| parse_error("`children` must be an array"))?;
    let mut children = Vec::with_capacity(lists.len());
    for (j, list) in lists.iter().enumerate() {
        let list = list
            .as_array()
            .ok_or_else(|| parse_error(format!("children of parent {j} must be an array")))?;
        let mut parsed = Vec::with_capacity(list.len());
        for c in list {
            let kind = parse_type(field(c, "type")?, &names)?;
            let displacement = parse_point(dim, field(c, "displacement")?)?;
            parsed.push((kind, displacement));
        }
        children.push(parsed);
    }
    let seed = match doc.get("seed") {
        Some(v) => parse_type(v, &names)?,
        None => 0,
    };
    SubstitutionRule::new(dim, expansion, raw, children, seed)
}

fn default_name(i: usize) -> String {
    if i < 26 {
        ((b'a' + i as u8) as char).to_string()
    } else {
        format!("t{i}")
    }
}

pub fn rule_from_str(text: &str) -> Result<SubstitutionRule> {
    let doc: Value = serde_json::from_str(text).map_err(|e| parse_error(e.to_string()))?;
    rule_from_value(&doc)
}

pub fn rule_from_path(path: impl AsRef<Path>) -> Result<SubstitutionRule> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    rule_from_str(&text)
}

/// Serializes a rule in the file format, with punctures at the origin.
pub fn rule_to_value(rule: &SubstitutionRule) -> Value {
    let point = |p: Point| if rule.dim == 1 { json!(p[0]) } else { json!([p[0], p[1]]) };
    let expansion: Vec<f64> = (0..rule.dim)
        .flat_map(|r| (0..rule.dim).map(move |c| (r, c)))
        .map(|(r, c)| rule.expansion.m[r][c])
        .collect();
    let prototiles: Vec<Value> = rule
        .prototiles
        .iter()
        .map(|p| {
            json!({
                "name": p.name,
                "vertices": p.support.vertices.iter().map(|&v| point(v)).collect::<Vec<_>>(),
                "puncture": point([0.0, 0.0]),
            })
        })
        .collect();
    let children: Vec<Value> = rule
        .children
        .iter()
        .map(|list| {
            Value::Array(
                list.iter()
                    .map(|c| json!({"type": rule.prototiles[c.kind].name, "displacement": point(c.displacement)}))
                    .collect(),
            )
        })
        .collect();
    json!({
        "dimension": rule.dim,
        "expansion": expansion,
        "prototiles": prototiles,
        "children": children,
        "seed": rule.prototiles[rule.seed].name,
    })
}
