//! JSON input files and report output.
//!
//! Map and vector files carry a `"space"` field holding either the space
//! inline or a path to a space file, resolved relative to the referring file.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Serialize;
use serde_json::Value;

use crate::dynamics::ClassificationParams;
use crate::error::{domain, Error, Result};
use crate::free::FreeVector;
use crate::maps::{LipMap, MapSpec};
use crate::metric::MetricSpace;

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|source| Error::Parse { path: path.display().to_string(), source })
}

fn from_value<T: serde::de::DeserializeOwned>(path: &Path, v: Value) -> Result<T> {
    serde_json::from_value(v).map_err(|source| Error::Parse { path: path.display().to_string(), source })
}

pub fn load_space(path: &Path) -> Result<Arc<MetricSpace>> {
    let v = read_json(path)?;
    Ok(Arc::new(from_value(path, v)?))
}

fn resolve_space(file: &Path, v: Option<Value>) -> Result<Arc<MetricSpace>> {
    match v {
        Some(Value::String(rel)) => {
            let dir = file.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
            load_space(&dir.join(rel))
        }
        Some(inline @ Value::Object(_)) => Ok(Arc::new(from_value(file, inline)?)),
        Some(other) => Err(domain(format!("{}: \"space\" must be an object or a path, found {other}", file.display()))),
        None => Err(domain(format!("{}: missing \"space\"", file.display()))),
    }
}

fn split_space(path: &Path) -> Result<(Arc<MetricSpace>, serde_json::Map<String, Value>)> {
    let Value::Object(mut obj) = read_json(path)? else {
        return Err(domain(format!("{}: expected a JSON object", path.display())));
    };
    let space = resolve_space(path, obj.remove("space"))?;
    Ok((space, obj))
}

/// A map file: `{"space": ..., "kind": "finite-table" | ..., ...}`.
pub fn load_map(path: &Path) -> Result<LipMap> {
    let (space, rest) = split_space(path)?;
    load_map_over(path, space, rest)
}

fn load_map_over(path: &Path, space: Arc<MetricSpace>, rest: serde_json::Map<String, Value>) -> Result<LipMap> {
    let spec: MapSpec = from_value(path, Value::Object(rest))?;
    LipMap::from_spec(space, spec)
}

/// Parses `terms` against a space: `[[point, coeff], ...]`.
pub fn parse_terms(space: &Arc<MetricSpace>, terms: &Value) -> Result<FreeVector> {
    let arr = terms.as_array().ok_or_else(|| domain("\"terms\" must be an array"))?;
    let mut pairs = Vec::with_capacity(arr.len());
    for t in arr {
        let pair = t.as_array().filter(|p| p.len() == 2).ok_or_else(|| domain(format!("bad term {t}")))?;
        let p = space.parse_point(&pair[0])?;
        let c = pair[1].as_f64().ok_or_else(|| domain(format!("bad coefficient {}", pair[1])))?;
        pairs.push((p, c));
    }
    FreeVector::new(space.clone(), pairs)
}

/// A vector file: `{"space": ..., "terms": [[point, coeff], ...]}`.
pub fn load_vector(path: &Path) -> Result<FreeVector> {
    let (space, rest) = split_space(path)?;
    load_vector_over(path, space, &rest)
}

fn load_vector_over(path: &Path, space: Arc<MetricSpace>, rest: &serde_json::Map<String, Value>) -> Result<FreeVector> {
    let terms = rest.get("terms").ok_or_else(|| domain(format!("{}: missing \"terms\"", path.display())))?;
    parse_terms(&space, terms)
}

/// Loads a map and a vector, rebinding the vector to the map's space when
/// both describe the same space.
pub fn load_map_and_vector(map: &Path, vector: &Path) -> Result<(LipMap, FreeVector)> {
    let f = load_map(map)?;
    let (space, rest) = split_space(vector)?;
    if *space != **f.space() {
        return Err(Error::SpaceMismatch);
    }
    let mu = load_vector_over(vector, f.space().clone(), &rest)?;
    Ok((f, mu))
}

pub fn load_params(path: &Path) -> Result<ClassificationParams> {
    let v = read_json(path)?;
    let p: ClassificationParams = from_value(path, v)?;
    p.validate()?;
    Ok(p)
}

/// Pretty JSON with a trailing newline; byte-stable for equal values.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, to_json_string(value)?)?;
    Ok(())
}

/// `step,norm` rows.
pub fn profile_csv(profile: &[f64]) -> String {
    let mut s = String::from("step,norm\n");
    for (k, v) in profile.iter().enumerate() {
        s.push_str(&format!("{k},{v}\n"));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::Point;

    fn tmp(name: &str, body: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("freelip-io-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let p = dir.join(name);
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn relative_space_reference() {
        tmp("unit.json", r#"{"kind": "interval", "lo": 0, "hi": 1}"#);
        let m =
            tmp("dbl.json", r#"{"space": "unit.json", "kind": "piecewise-linear", "knots": [[0,0],[0.5,1],[1,1]]}"#);
        let v = tmp("v.json", r#"{"space": "unit.json", "terms": [[0.5, 1], [0.25, 1]]}"#);
        let (f, mu) = load_map_and_vector(&m, &v).unwrap();
        let img = crate::free::push_forward(&f, &mu).unwrap();
        assert_eq!(img.terms(), &[(Point::real(0.5), 1.0), (Point::real(1.0), 1.0)]);
    }

    #[test]
    fn parse_error_has_location() {
        let p = tmp("broken.json", "{\n  \"kind\": \"finite\",\n  \"matrix\": [[0, 1], [1, 0]\n}");
        let err = load_space(&p).unwrap_err().to_string();
        assert!(err.contains("broken.json"), "{err}");
        assert!(err.contains("line 4"), "{err}");
    }

    #[test]
    fn invalid_metric_is_rejected() {
        let p = tmp("bad.json", r#"{"kind": "finite", "matrix": [[0, 1, 1], [1, 0, 5], [1, 5, 0]]}"#);
        let err = load_space(&p).unwrap_err().to_string();
        assert!(err.contains("triangle"), "{err}");
    }

    #[test]
    fn csv_layout() {
        assert_eq!(profile_csv(&[1.0, 2.5]), "step,norm\n0,1\n1,2.5\n");
    }
}
