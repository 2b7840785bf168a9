//! Report envelope shared by every subcommand.

use std::path::Path;

use oiso::io::SCHEMA;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::Global;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Accepted,
    Rejected,
}

impl Status {
    fn as_str(self) -> &'static str {
        match self {
            Status::Accepted => "accepted",
            Status::Rejected => "rejected",
        }
    }
}

pub struct Outcome {
    pub status: Status,
    pub result: Value,
}

impl Outcome {
    pub fn accepted(result: Value) -> Self {
        Self { status: Status::Accepted, result }
    }

    pub fn rejected(result: Value) -> Self {
        Self { status: Status::Rejected, result }
    }

    pub fn by(ok: bool, result: Value) -> Self {
        Self { status: if ok { Status::Accepted } else { Status::Rejected }, result }
    }
}

/// Path and SHA-256 of an input file.
pub fn digest(path: &Path) -> oiso::Result<Value> {
    let bytes = std::fs::read(path)?;
    let hash = Sha256::digest(&bytes);
    let hex: String = hash.iter().map(|b| format!("{b:02x}")).collect();
    Ok(json!({ "path": path.display().to_string(), "sha256": hex }))
}

/// Result fields at top level, wrapped with the command echo, input digests,
/// seed, mode and status.
pub fn envelope(command: &str, argv: Vec<String>, inputs: Vec<Value>, global: &Global, outcome: Outcome) -> Value {
    let mut map = match outcome.result {
        Value::Object(m) => m,
        other => {
            let mut m = Map::new();
            m.insert("result".into(), other);
            m
        }
    };
    map.insert("schema".into(), json!(SCHEMA));
    map.insert("command".into(), json!({ "name": command, "argv": argv }));
    map.insert("inputs".into(), Value::Array(inputs));
    map.insert("seed".into(), json!(global.seed));
    map.entry("mode").or_insert(json!(global.mode.to_string()));
    map.insert("status".into(), json!(outcome.status.as_str()));
    Value::Object(map)
}

pub fn render(report: &Value) -> String {
    serde_json::to_string_pretty(report).expect("reports serialize")
}
