//! Flat `key=value` (or JSON object) config files whose keys are flag names.

use std::fs;
use std::path::Path;

use crate::failure::Failure;

/// Parses a config file into `(key, value)` pairs in file order.
pub fn load(path: &Path) -> Result<Vec<(String, String)>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    if text.trim_start().starts_with('{') {
        parse_json(&text)
    } else {
        parse_flat(&text)
    }
}

fn parse_flat(text: &str) -> Result<Vec<(String, String)>, Failure> {
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Failure::Invalid(format!("config line {}: expected key=value", k + 1)))?;
        out.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(out)
}

fn parse_json(text: &str) -> Result<Vec<(String, String)>, Failure> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Failure::Invalid(format!("config: {e}")))?;
    let object = value
        .as_object()
        .ok_or_else(|| Failure::Invalid("config: expected a JSON object".into()))?;
    let mut out = Vec::new();
    for (key, v) in object {
        let text = match v {
            serde_json::Value::String(s) => s.clone(),
            serde_json::Value::Number(n) => n.to_string(),
            serde_json::Value::Bool(b) => b.to_string(),
            serde_json::Value::Array(items) => items
                .iter()
                .map(|x| match x {
                    serde_json::Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect::<Vec<_>>()
                .join(","),
            _ => return Err(Failure::Invalid(format!("config key {key}: unsupported value"))),
        };
        out.push((key.clone(), text));
    }
    Ok(out)
}

/// Turns config pairs into command-line flags. Boolean `true` becomes a bare
/// flag and `false` is dropped.
pub fn to_flags(pairs: &[(String, String)]) -> Vec<String> {
    let mut flags = Vec::new();
    for (key, value) in pairs {
        let key = key.trim_start_matches("--").replace('_', "-");
        match value.as_str() {
            "true" => flags.push(format!("--{key}")),
            "false" => {}
            _ => {
                flags.push(format!("--{key}"));
                flags.push(value.clone());
            }
        }
    }
    flags
}

/// Splices flags from `--config FILE` in front of the explicit ones so that
/// explicit flags win.
pub fn expand(args: Vec<String>) -> Result<Vec<String>, Failure> {
    let mut path = None;
    let mut rest = Vec::with_capacity(args.len());
    let mut iter = args.into_iter();
    while let Some(arg) = iter.next() {
        if arg == "--config" {
            let p = iter.next().ok_or_else(|| Failure::Invalid("--config needs a path".into()))?;
            path = Some(p);
        } else if let Some(p) = arg.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(arg);
        }
    }
    let Some(path) = path else {
        return Ok(rest);
    };
    let flags = to_flags(&load(Path::new(&path))?);
    // program name, then the subcommand and any positional argument it takes
    let mut cut = 1;
    if rest.len() > 1 && !rest[1].starts_with('-') {
        cut = 2;
        if rest[1] == "verify" && rest.len() > 2 && !rest[2].starts_with('-') {
            cut = 3;
        }
    }
    let mut out: Vec<String> = rest[..cut.min(rest.len())].to_vec();
    out.extend(flags);
    out.extend(rest[cut.min(rest.len())..].iter().cloned());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_and_json_agree() {
        let flat = parse_flat("# sweep\naxis = p\nlo=3.01\ncount=64 # nodes\n").unwrap();
        let json = parse_json(r#"{"axis": "p", "lo": 3.01, "count": 64}"#).unwrap();
        let mut a = to_flags(&flat);
        let mut b = to_flags(&json);
        a.sort();
        b.sort();
        assert_eq!(a, b);
    }

    #[test]
    fn booleans_become_bare_flags() {
        let f = to_flags(&[("json".into(), "true".into()), ("quiet".into(), "false".into())]);
        assert_eq!(f, vec!["--json".to_string()]);
    }

    #[test]
    fn malformed_line_is_rejected() {
        assert!(matches!(parse_flat("axis p"), Err(Failure::Invalid(_))));
    }
}
