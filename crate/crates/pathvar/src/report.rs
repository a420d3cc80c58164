//! Report envelope shared by the experiment drivers.
//!
//! Every emitted JSON document carries the tool version, the full
//! configuration it was produced from, and a content hash over everything
//! except the timestamp, so re-runs with identical configuration are
//! byte-identical modulo that one field.

use serde_json::Value;
use std::time::{SystemTime, UNIX_EPOCH};

pub const TOOL_NAME: &str = "pathvar";

pub fn tool_version() -> String {
    format!("{TOOL_NAME} {}", env!("CARGO_PKG_VERSION"))
}

/// FNV-1a over the canonical serialization.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Wraps a report body with version, config echo, timestamp and a hash of
/// the timestamp-free content.
pub fn envelope(config: Value, body: Value) -> Value {
    let hashable = serde_json::json!({
        "tool": tool_version(),
        "config": config,
        "body": body,
    });
    let digest = fnv1a(hashable.to_string().as_bytes());
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0);
    serde_json::json!({
        "tool": hashable["tool"],
        "config": hashable["config"],
        "body": hashable["body"],
        "content_hash": format!("{digest:016x}"),
        "generated_unix_ms": timestamp,
    })
}

/// The envelope with the timestamp field dropped; two runs with the same
/// configuration produce identical strings.
pub fn stable_view(report: &Value) -> Value {
    let mut clone = report.clone();
    if let Some(map) = clone.as_object_mut() {
        map.remove("generated_unix_ms");
    }
    clone
}
