//! `--config <path>`: a JSON object whose keys mirror the long flags.
//! Entries are spliced into argv right after the subcommand, skipping any
//! key the command line already sets.

use std::ffi::OsString;
use std::fs;

use anyhow::{bail, Context, Result};
use serde_json::Value;

fn config_path(args: &[OsString]) -> Option<String> {
    let mut it = args.iter().map(|a| a.to_string_lossy().into_owned());
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

fn on_command_line(args: &[OsString], flag: &str) -> bool {
    args.iter().any(|a| {
        let a = a.to_string_lossy();
        a == flag || a.starts_with(&format!("{flag}="))
    })
}

fn scalar(key: &str, v: &Value) -> Result<String> {
    Ok(match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        _ => bail!("config key `{key}`: expected a string or number, got {v}"),
    })
}

pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path).with_context(|| format!("reading config {path}"))?;
    let doc: Value = serde_json::from_str(&text).with_context(|| format!("parsing config {path}"))?;
    let Value::Object(entries) = doc else {
        bail!("config {path}: expected a JSON object");
    };
    let mut injected = Vec::new();
    for (key, v) in &entries {
        let name = key.replace('_', "-");
        if name == "config" {
            continue;
        }
        let flag = format!("--{name}");
        if on_command_line(&args, &flag) {
            continue;
        }
        match v {
            Value::Bool(true) => injected.push(flag),
            Value::Bool(false) | Value::Null => {}
            Value::Array(items) => {
                for item in items {
                    injected.push(format!("{flag}={}", scalar(key, item)?));
                }
            }
            other => injected.push(format!("{flag}={}", scalar(key, other)?)),
        }
    }
    let at = if args.len() > 1 { 2 } else { args.len() };
    let mut out = args[..at].to_vec();
    out.extend(injected.into_iter().map(OsString::from));
    out.extend_from_slice(&args[at..]);
    Ok(out)
}
