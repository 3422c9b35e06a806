//! Canonical JSON rendering shared by the CLI and the HTTP service, so both
//! emit byte-identical bodies.

use serde::Serialize;

/// Compact JSON followed by a single newline.
pub fn to_body<T: Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string(value).expect("response types serialize");
    out.push('\n');
    out
}

/// Indented JSON followed by a single newline.
pub fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("response types serialize");
    out.push('\n');
    out
}
