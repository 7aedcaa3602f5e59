//! `--config FILE` support: `key=value` lines become flags unless the same
//! flag is already on the command line.

use std::ffi::OsString;
use std::path::Path;

use crate::error::{Error, Result};

/// Parses `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key=value", i + 1)))?;
        let key = k.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", i + 1)));
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

fn flag_present(args: &[OsString], key: &str) -> bool {
    let long = format!("--{key}");
    let prefixed = format!("--{key}=");
    args.iter().any(|a| {
        a.to_str()
            .is_some_and(|s| s == long || s.starts_with(&prefixed))
    })
}

fn take_config_path(args: &mut Vec<OsString>) -> Result<Option<OsString>> {
    let Some(i) = args
        .iter()
        .position(|a| a == "--config" || a.to_str().is_some_and(|s| s.starts_with("--config=")))
    else {
        return Ok(None);
    };
    let arg = args.remove(i);
    if let Some(path) = arg.to_str().and_then(|s| s.strip_prefix("--config=")) {
        return Ok(Some(path.into()));
    }
    if i < args.len() {
        Ok(Some(args.remove(i)))
    } else {
        Err(Error::Config("--config needs a file path".into()))
    }
}

/// Expands `--config FILE`. Config entries are appended, which places them
/// after the subcommand; flags already given on the command line win.
pub fn expand_config(mut args: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(path) = take_config_path(&mut args)? else {
        return Ok(args);
    };
    let path = Path::new(&path);
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let entries = parse_config(&text)?;
    let injected: Vec<OsString> = entries
        .into_iter()
        .filter(|(k, _)| !flag_present(&args, k))
        .map(|(k, v)| format!("--{k}={v}").into())
        .collect();
    args.extend(injected);
    Ok(args)
}
