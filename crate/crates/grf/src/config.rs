//! `key = value` run-configuration files.
//!
//! Each key names a long flag of the chosen subcommand (`N = 100` becomes
//! `--N 100`). Values `true` and `false` toggle switches. The file's arguments
//! are placed ahead of the command-line ones, so flags given explicitly win.

use std::ffi::OsString;
use std::path::Path;

use crate::Failure;

pub fn parse(text: &str) -> Result<Vec<(String, String)>, Failure> {
    let mut entries = Vec::new();
    for (number, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("config line {}: expected `key = value`", number + 1)))?;
        let key = key.trim().trim_start_matches("--");
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(Failure::Usage(format!("config line {}: bad key `{key}`", number + 1)));
        }
        entries.push((key.to_string(), value.trim().to_string()));
    }
    Ok(entries)
}

pub fn load(path: &Path) -> Result<Vec<(String, String)>, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    parse(&text)
}

pub fn to_args(entries: &[(String, String)]) -> Vec<OsString> {
    let mut args = Vec::new();
    for (key, value) in entries {
        match value.as_str() {
            "false" => {}
            "true" => args.push(format!("--{key}").into()),
            _ => {
                args.push(format!("--{key}").into());
                args.push(value.into());
            }
        }
    }
    args
}

/// The `--config` path in `argv`, if any.
pub fn find_config_flag(argv: &[OsString]) -> Option<OsString> {
    let mut iter = argv.iter();
    while let Some(arg) = iter.next() {
        let s = arg.to_string_lossy();
        if s == "--config" {
            return iter.next().cloned();
        }
        if let Some(rest) = s.strip_prefix("--config=") {
            return Some(rest.into());
        }
    }
    None
}

/// Inserts `extra` right after the first `depth` occurrences of the
/// subcommand path `names` in `argv`.
pub fn splice(argv: &[OsString], names: &[&str], extra: Vec<OsString>) -> Vec<OsString> {
    let mut out = Vec::with_capacity(argv.len() + extra.len());
    let mut pending = names.iter().peekable();
    let mut extra = Some(extra);
    for arg in argv.iter().skip(1) {
        out.push(arg.clone());
        if let Some(name) = pending.peek() {
            if arg.to_string_lossy() == **name {
                pending.next();
                if pending.peek().is_none() {
                    out.extend(extra.take().unwrap_or_default());
                }
            }
        }
    }
    if let Some(rest) = extra {
        out.extend(rest);
    }
    let mut full = vec![argv.first().cloned().unwrap_or_else(|| "grf".into())];
    full.extend(out);
    full
}
