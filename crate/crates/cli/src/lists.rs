//! Parsing of list-valued flags.

use std::str::FromStr;

use anyhow::{bail, Context, Result};

/// Parses `a,b,c`, where every item may also be an inclusive range
/// `start:end:step` (step defaults to 1).
pub fn parse_sizes(text: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let parts: Vec<&str> = item.split(':').collect();
        let num = |s: &str| -> Result<usize> {
            s.trim().parse().with_context(|| format!("'{s}' is not a non-negative integer"))
        };
        match parts.as_slice() {
            [v] => out.push(num(v)?),
            [a, b] | [a, b, _] => {
                let (start, end) = (num(a)?, num(b)?);
                let step = if parts.len() == 3 { num(parts[2])? } else { 1 };
                if step == 0 || start > end {
                    bail!("invalid range '{item}'");
                }
                out.extend((start..=end).step_by(step));
            }
            _ => bail!("invalid list item '{item}'"),
        }
    }
    if out.is_empty() {
        bail!("empty list '{text}'");
    }
    Ok(out)
}

/// Parses a comma-separated list of values.
pub fn parse_list<T>(text: &str) -> Result<Vec<T>>
where
    T: FromStr,
    T::Err: std::error::Error + Send + Sync + 'static,
{
    let out = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().with_context(|| format!("invalid list item '{s}'")))
        .collect::<Result<Vec<T>>>()?;
    if out.is_empty() {
        bail!("empty list '{text}'");
    }
    Ok(out)
}
