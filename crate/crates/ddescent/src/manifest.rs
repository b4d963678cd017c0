//! Run manifests: every result file records the command, its parameters,
//! the seed, the tool version, and a timestamp. Payloads are a pure
//! function of everything except the timestamp, so reruns compare equal on
//! the payload.

use std::collections::BTreeMap;

use chrono::{SecondsFormat, Utc};
use serde_json::{json, Value};

#[derive(Debug, Clone)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(command: &str, parameters: BTreeMap<String, String>, seed: Option<u64>) -> Self {
        RunManifest {
            command: command.to_string(),
            parameters,
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: Utc::now().to_rfc3339_opts(SecondsFormat::Micros, true),
        }
    }

    pub fn value(&self) -> Value {
        let parameters: Value = self
            .parameters
            .iter()
            .map(|(k, v)| (k.clone(), Value::String(v.clone())))
            .collect::<serde_json::Map<String, Value>>()
            .into();
        json!({
            "command": self.command,
            "parameters": parameters,
            "seed": self.seed,
            "tool_version": self.tool_version,
            "timestamp": self.timestamp,
        })
    }
}

/// A result file: the manifest next to the payload it describes.
pub fn result_document(manifest: &RunManifest, payload: Value) -> Value {
    json!({
        "manifest": manifest.value(),
        "payload": payload,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jsonio::canonical_json;

    #[test]
    fn manifest_shape() {
        let mut params = BTreeMap::new();
        params.insert("n".to_string(), "5".to_string());
        let manifest = RunManifest::new("exact", params, Some(42));
        let value = manifest.value();
        assert_eq!(value["command"], "exact");
        assert_eq!(value["parameters"]["n"], "5");
        assert_eq!(value["seed"], 42);
        // RFC 3339 with explicit UTC offset
        assert!(manifest.timestamp.ends_with('Z'), "{}", manifest.timestamp);
        let doc = result_document(&manifest, serde_json::json!({"x": 1}));
        let text = canonical_json(&doc);
        assert!(text.starts_with("{\"manifest\":{\"command\":\"exact\""));
        assert!(text.ends_with("\"payload\":{\"x\":1}}"));
    }
}
