use std::fs;
use std::io::{self, Write};
use std::path::Path;

use crate::failure::Failure;

/// Version of every JSON document the CLI prints.
pub const SCHEMA_VERSION: u32 = 1;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Prints one JSON document with the schema version added; keys are sorted.
pub fn emit_json(mut value: serde_json::Value) -> Result<(), Failure> {
    if let Some(map) = value.as_object_mut() {
        map.insert("schema_version".into(), SCHEMA_VERSION.into());
    }
    let text = serde_json::to_string_pretty(&value).map_err(|e| Failure::Io(e.to_string()))?;
    let mut out = io::stdout().lock();
    writeln!(out, "{text}")?;
    Ok(())
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}
