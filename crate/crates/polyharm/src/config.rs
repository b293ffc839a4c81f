//! Config files: `key = value` lines, `#` comments, keys named like the
//! command-line flags. Entries become `--key value` arguments placed before
//! the user's own flags, so flags given on the command line win.

use std::ffi::OsString;
use std::fs;
use std::io;
use std::path::Path;

/// Parses config text into flag arguments. Boolean flags are written as
/// `key = true` and dropped for `false`.
pub fn parse(text: &str) -> Result<Vec<OsString>, String> {
    let mut args = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| format!("line {}: expected `key = value`", i + 1))?;
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() || key.starts_with('-') || key.contains(char::is_whitespace) {
            return Err(format!("line {}: bad key `{key}`", i + 1));
        }
        match value {
            "true" => args.push(format!("--{key}").into()),
            "false" => {}
            _ => {
                args.push(format!("--{key}").into());
                args.push(value.into());
            }
        }
    }
    Ok(args)
}

pub fn load(path: &Path) -> io::Result<Vec<OsString>> {
    let text = fs::read_to_string(path)?;
    parse(&text).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("{}: {e}", path.display())))
}

/// The value of `--config` in `argv`, if any.
pub fn config_path(argv: &[OsString]) -> Option<OsString> {
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = s.strip_prefix("--config=") {
            return Some(v.into());
        }
    }
    None
}

/// `argv` with `extra` inserted right after the first token naming one of
/// `commands`, or appended if there is none.
pub fn splice(argv: &[OsString], commands: &[&str], extra: Vec<OsString>) -> Vec<OsString> {
    let pos = argv.iter().skip(1).position(|a| commands.iter().any(|c| a == c)).map(|i| i + 2).unwrap_or(argv.len());
    let mut out = argv[..pos].to_vec();
    out.extend(extra);
    out.extend_from_slice(&argv[pos..]);
    out
}
