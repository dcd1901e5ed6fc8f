//! Flat `key = value` configuration files.
//!
//! Every key is the long name of a flag of the chosen subcommand. The file's
//! entries are spliced into the argument list directly after the subcommand
//! name, so any flag given on the command line comes later and overrides
//! them. Boolean flags take `true` or `false`. Blank lines and lines starting
//! with `#` are ignored.

use std::ffi::OsString;
use std::path::Path;

use anyhow::{bail, Context, Result};

/// Flags that take no value.
const SWITCHES: [&str; 1] = ["no-early-stop"];

pub fn parse_config(text: &str, origin: &Path) -> Result<Vec<OsString>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("{}:{}: expected 'key = value', got '{line}'", origin.display(), i + 1);
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || key == "config" {
            bail!("{}:{}: invalid key '{key}'", origin.display(), i + 1);
        }
        if SWITCHES.contains(&key) {
            match value {
                "true" => out.push(format!("--{key}").into()),
                "false" => {}
                other => bail!("{}:{}: '{key}' takes true or false, got '{other}'", origin.display(), i + 1),
            }
        } else {
            out.push(format!("--{key}").into());
            out.push(value.into());
        }
    }
    Ok(out)
}

/// Returns `args` with the contents of any `--config FILE` spliced in after
/// the subcommand name.
pub fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let position = args.iter().position(|a| a == "--config");
    let inline = args
        .iter()
        .position(|a| a.to_str().is_some_and(|s| s.starts_with("--config=")));
    let path: OsString = match (position, inline) {
        (Some(i), _) => match args.get(i + 1) {
            Some(p) => p.clone(),
            None => return Ok(args), // let the parser report the missing value
        },
        (None, Some(i)) => args[i].to_str().unwrap()["--config=".len()..].into(),
        (None, None) => return Ok(args),
    };
    let path = Path::new(&path);
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config file {}", path.display()))?;
    let extra = parse_config(&text, path)?;
    let split = subcommand_end(&args);
    let mut out = args[..split].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[split..]);
    Ok(out)
}

/// Index just past the subcommand name, skipping a leading `--config FILE`.
fn subcommand_end(args: &[OsString]) -> usize {
    let mut i = 1;
    while i < args.len() {
        match args[i].to_str() {
            Some("--config") => i += 2,
            Some(s) if s.starts_with("--config=") => i += 1,
            _ => return i + 1,
        }
    }
    args.len()
}
