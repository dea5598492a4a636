//! ETRep JSON documents.
//!
//! ```json
//! {
//!   "schema_version": "1.0",
//!   "n": 1,
//!   "sections": [
//!     { "v": [0, 0], "psi": 0, "x": 0, "a": 2, "b": 1 },
//!     { "v": [0.1, 0], "psi": 0.2, "x": 1.5, "a": 2, "b": 1 }
//!   ],
//!   "metadata": { "label": "example" }
//! }
//! ```
//!
//! Numbers are written in shortest round-trip form. Reading checks the
//! schema only; geometric validity is left to [`crate::model::validate`].

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::model::{CrossSection, ETRep};

pub const SCHEMA_VERSION: &str = "1.0";

fn schema(pointer: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Schema {
        pointer: pointer.into(),
        message: message.into(),
    }
}

fn field<'a>(obj: &'a Map<String, Value>, name: &str, at: &str) -> Result<&'a Value> {
    obj.get(name)
        .ok_or_else(|| schema(format!("{at}/{name}"), "missing field"))
}

fn number(v: &Value, at: &str) -> Result<f64> {
    match v.as_f64() {
        Some(x) if x.is_finite() => Ok(x),
        _ => Err(schema(at, "expected a finite number")),
    }
}

fn parse_section(v: &Value, at: &str) -> Result<CrossSection> {
    let obj = v.as_object().ok_or_else(|| schema(at, "expected an object"))?;
    let vp = format!("{at}/v");
    let vv = field(obj, "v", at)?
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| schema(&vp, "expected an array of 2 numbers"))?;
    let v = Vec2::new(number(&vv[0], &format!("{vp}/0"))?, number(&vv[1], &format!("{vp}/1"))?);
    let num = |name: &str| number(field(obj, name, at)?, &format!("{at}/{name}"));
    Ok(CrossSection {
        v,
        psi: num("psi")?,
        x: num("x")?,
        a: num("a")?,
        b: num("b")?,
    })
}

/// Parses a document held in a JSON value.
pub fn etrep_from_value(doc: &Value) -> Result<ETRep> {
    let obj = doc.as_object().ok_or_else(|| schema("", "expected an object"))?;
    match field(obj, "schema_version", "")?.as_str() {
        Some(_) => {}
        None => return Err(schema("/schema_version", "expected a string")),
    }
    let n = field(obj, "n", "")?
        .as_u64()
        .ok_or_else(|| schema("/n", "expected a nonnegative integer"))? as usize;
    let sections = field(obj, "sections", "")?
        .as_array()
        .ok_or_else(|| schema("/sections", "expected an array"))?;
    if sections.len() != n + 1 {
        return Err(schema(
            "/sections",
            format!("expected n + 1 = {} sections, found {}", n + 1, sections.len()),
        ));
    }
    let sections = sections
        .iter()
        .enumerate()
        .map(|(i, s)| parse_section(s, &format!("/sections/{i}")))
        .collect::<Result<Vec<_>>>()?;
    let mut metadata = BTreeMap::new();
    if let Some(m) = obj.get("metadata") {
        let m = m.as_object().ok_or_else(|| schema("/metadata", "expected an object"))?;
        for (k, v) in m {
            let s = v
                .as_str()
                .ok_or_else(|| schema(format!("/metadata/{k}"), "expected a string"))?;
            metadata.insert(k.clone(), s.to_string());
        }
    }
    let mut s = ETRep::new(sections)?;
    s.metadata = metadata;
    Ok(s)
}

pub fn etrep_to_value(s: &ETRep) -> Result<Value> {
    if let Some(i) = s.sections.iter().position(|c| !c.is_finite()) {
        return Err(schema(format!("/sections/{i}"), "cannot serialize non-finite values"));
    }
    let sections: Vec<Value> = s
        .sections
        .iter()
        .map(|c| json!({ "v": [c.v[0], c.v[1]], "psi": c.psi, "x": c.x, "a": c.a, "b": c.b }))
        .collect();
    Ok(json!({
        "schema_version": SCHEMA_VERSION,
        "n": s.n(),
        "sections": sections,
        "metadata": s.metadata,
    }))
}

pub fn etrep_from_str(text: &str) -> Result<ETRep> {
    let doc: Value = serde_json::from_str(text).map_err(|e| schema("", format!("malformed JSON: {e}")))?;
    etrep_from_value(&doc)
}

pub fn etrep_to_string(s: &ETRep) -> Result<String> {
    let mut out = serde_json::to_string_pretty(&etrep_to_value(s)?).map_err(|e| Error::Io(e.to_string()))?;
    out.push('\n');
    Ok(out)
}

pub fn read_etrep(path: impl AsRef<Path>) -> Result<ETRep> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    etrep_from_str(&text).map_err(|e| match e {
        Error::Schema { pointer, message } => Error::Schema {
            pointer,
            message: format!("{message} (in {})", path.display()),
        },
        other => other,
    })
}

pub fn write_etrep(s: &ETRep, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, etrep_to_string(s)?).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// `*.json` files in `dir`, in lexicographic order.
pub fn list_json_files(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    Ok(files)
}

/// Reads every ETRep document in `dir` (lexicographic order).
pub fn read_population(dir: impl AsRef<Path>) -> Result<Vec<ETRep>> {
    list_json_files(dir)?.iter().map(read_etrep).collect()
}
