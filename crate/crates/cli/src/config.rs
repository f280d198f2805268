//! JSON run configs. Keys are the long flag names; `command` names the
//! subcommand. Arrays repeat a flag and `true` sets a switch.
//!
//! ```json
//! { "command": "force", "geom": "ss", "material": "drude:al", "a": "500nm" }
//! ```

use std::ffi::OsString;
use std::path::Path;

use serde_json::Value;

use crate::error::CliError;

const GLOBAL_KEYS: [&str; 3] = ["threads", "high-tail", "continuity-tol"];

/// Expands `--config FILE` into flags. Anything else on the command line is
/// appended after the config so it takes precedence.
pub fn expand_args(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(pos) = args.iter().position(|a| a == "--config") else {
        return Ok(args);
    };
    let path = args
        .get(pos + 1)
        .ok_or_else(|| CliError::Config("--config needs a file path".into()))?
        .clone();
    let text = std::fs::read_to_string(Path::new(&path))
        .map_err(|e| CliError::Config(format!("{}: {e}", Path::new(&path).display())))?;
    let config: Value =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("config JSON: {e}")))?;
    let expanded = config_to_args(&config)?;

    let mut rest: Vec<OsString> = args.iter().skip(1).cloned().collect();
    rest.drain(pos - 1..pos + 1);
    let mut out = vec![args[0].clone()];
    let (globals, command) = split_globals(&rest);
    out.extend(globals);
    out.extend(expanded.into_iter().map(OsString::from));
    out.extend(command);
    Ok(out)
}

// Global flags given on the command line must precede the subcommand.
fn split_globals(rest: &[OsString]) -> (Vec<OsString>, Vec<OsString>) {
    let mut globals = Vec::new();
    let mut others = Vec::new();
    let mut i = 0;
    while i < rest.len() {
        let is_global = rest[i]
            .to_str()
            .and_then(|s| s.strip_prefix("--"))
            .is_some_and(|k| GLOBAL_KEYS.contains(&k));
        if is_global && i + 1 < rest.len() {
            globals.push(rest[i].clone());
            globals.push(rest[i + 1].clone());
            i += 2;
        } else {
            others.push(rest[i].clone());
            i += 1;
        }
    }
    (globals, others)
}

pub fn config_to_args(config: &Value) -> Result<Vec<String>, CliError> {
    let map = config
        .as_object()
        .ok_or_else(|| CliError::Config("config must be a JSON object".into()))?;
    let command = map
        .get("command")
        .and_then(Value::as_str)
        .ok_or_else(|| CliError::Config("config needs a string `command`".into()))?;
    let mut globals = Vec::new();
    let mut flags = Vec::new();
    for (key, value) in map {
        if key == "command" {
            continue;
        }
        let target = if GLOBAL_KEYS.contains(&key.as_str()) {
            &mut globals
        } else {
            &mut flags
        };
        push_flag(target, key, value)?;
    }
    let mut args = globals;
    args.push(command.to_string());
    args.extend(flags);
    Ok(args)
}

fn push_flag(out: &mut Vec<String>, key: &str, value: &Value) -> Result<(), CliError> {
    let flag = format!("--{key}");
    match value {
        Value::Bool(true) => out.push(flag),
        Value::Bool(false) | Value::Null => {}
        Value::String(s) => {
            out.push(flag);
            out.push(s.clone());
        }
        Value::Number(n) => {
            out.push(flag);
            out.push(n.to_string());
        }
        Value::Array(items) => {
            for item in items {
                push_flag(out, key, item)?;
            }
        }
        Value::Object(_) => {
            return Err(CliError::Config(format!("config key `{key}` cannot be an object")));
        }
    }
    Ok(())
}
