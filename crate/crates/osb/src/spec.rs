//! Body spec files: a JSON `BodySpec` object with a mandatory top-level `"v": 1`.

use std::fs;

use osb_core::BodySpec;
use serde::Deserialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::error::OsbError;

pub const SPEC_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("missing version field \"v\"")]
    MissingVersion,
    #[error("unsupported version {0}, expected {SPEC_VERSION}")]
    Version(String),
    #[error("at `{path}`: {message}")]
    Schema { path: String, message: String },
}

pub fn parse_spec(text: &str) -> Result<BodySpec, SpecError> {
    let mut value: Value = serde_json::from_str(text).map_err(|e| SpecError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let obj = value.as_object_mut().ok_or_else(|| SpecError::Schema {
        path: ".".into(),
        message: "expected a JSON object".into(),
    })?;
    match obj.remove("v") {
        None => return Err(SpecError::MissingVersion),
        Some(v) if v.as_u64() == Some(SPEC_VERSION) => {}
        Some(v) => return Err(SpecError::Version(v.to_string())),
    }
    BodySpec::deserialize(&value).map_err(|_| locate(&value, ""))
}

/// Fields holding nested specs.
const NESTED: [&str; 4] = ["left", "right", "k", "inner"];

/// Schema error at the deepest failing nested spec. Internally tagged enums
/// buffer their content, which hides paths from `serde_path_to_error` once
/// the error is inside a nested spec.
fn locate(value: &Value, prefix: &str) -> SpecError {
    let join = |key: &str| if prefix.is_empty() { key.to_string() } else { format!("{prefix}.{key}") };
    if let Value::Object(obj) = value {
        for key in NESTED {
            if let Some(child) = obj.get(key) {
                if BodySpec::deserialize(child).is_err() {
                    return locate(child, &join(key));
                }
            }
        }
    }
    match serde_path_to_error::deserialize::<_, BodySpec>(value) {
        Err(e) => {
            let inner = e.path().to_string();
            let path = match (prefix.is_empty(), inner.as_str()) {
                (true, _) => inner,
                (false, ".") => prefix.to_string(),
                (false, _) => join(&inner),
            };
            SpecError::Schema {
                path,
                message: e.inner().to_string(),
            }
        }
        Ok(_) => unreachable!("the caller saw this value fail to parse"),
    }
}

/// Compact JSON with sorted keys, so equal specs serialize identically.
pub fn serialize_spec(spec: &BodySpec) -> String {
    let mut obj = match serde_json::to_value(spec).expect("BodySpec always serializes") {
        Value::Object(m) => m,
        _ => unreachable!("BodySpec is an internally tagged enum"),
    };
    obj.insert("v".into(), Value::from(SPEC_VERSION));
    let sorted: Map<String, Value> = obj.into_iter().collect();
    serde_json::to_string(&sorted).expect("JSON values always serialize")
}

/// First 16 hex digits of the SHA-256 of [`serialize_spec`].
pub fn spec_hash(spec: &BodySpec) -> String {
    let digest = Sha256::digest(serialize_spec(spec).as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Inline JSON if the argument starts with `{`, otherwise a file path.
pub fn load_spec(arg: &str) -> Result<BodySpec, OsbError> {
    if arg.trim_start().starts_with('{') {
        return Ok(parse_spec(arg)?);
    }
    let text = fs::read_to_string(arg).map_err(|e| OsbError::io(arg, e))?;
    Ok(parse_spec(&text)?)
}
