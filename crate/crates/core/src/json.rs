//! Canonical JSON text: object keys sorted, floats in shortest round-trip form.

use serde::Serialize;
use serde_json::{Map, Value};

fn sorted(v: Value) -> Value {
    match v {
        Value::Object(map) => {
            let mut entries: Vec<_> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            let mut out = Map::new();
            for (k, v) in entries {
                out.insert(k, sorted(v));
            }
            Value::Object(out)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(sorted).collect()),
        other => other,
    }
}

pub fn canonical<T: Serialize>(value: &T) -> crate::Result<String> {
    let v = serde_json::to_value(value)?;
    Ok(sorted(v).to_string())
}

/// Re-renders JSON text in canonical form.
pub fn canonicalize(text: &str) -> crate::Result<String> {
    let v: Value = serde_json::from_str(text)?;
    Ok(sorted(v).to_string())
}
