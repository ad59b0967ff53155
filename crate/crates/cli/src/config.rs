//! `key = value` config files, merged beneath command-line flags.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};

/// Keys that stand in for one another: if the command line sets any key of
/// one side, config entries from the other side are dropped.
const ALTERNATIVES: &[(&[&str], &[&str])] = &[(&["q"], &["q1", "q2"]), (&["pi-x"], &["a", "b"])];

/// Parses `key = value` lines. Blank lines and `#` comments are ignored;
/// underscores in keys are read as dashes.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut entries: Vec<(String, String)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("config line {}: expected key = value, got {raw:?}", lineno + 1);
        };
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        let value = value.trim();
        if key.is_empty() || value.is_empty() {
            bail!("config line {}: empty key or value", lineno + 1);
        }
        if key == "config" {
            bail!("config line {}: nested config files are not supported", lineno + 1);
        }
        if entries.iter().any(|(k, _)| *k == key) {
            bail!("config line {}: duplicate key {key:?}", lineno + 1);
        }
        entries.push((key, value.to_string()));
    }
    Ok(entries)
}

fn flag_present(args: &[String], key: &str) -> bool {
    let long = format!("--{key}");
    let prefix = format!("--{key}=");
    args.iter().any(|a| *a == long || a.starts_with(&prefix))
}

fn config_path(args: &[String]) -> Result<Option<String>> {
    let mut found = None;
    let mut iter = args.iter();
    while let Some(a) = iter.next() {
        if a == "--config" {
            let path = iter.next().context("--config needs a path")?;
            found = Some(path.clone());
        } else if let Some(path) = a.strip_prefix("--config=") {
            found = Some(path.to_string());
        }
    }
    Ok(found)
}

/// Appends config-file entries to `argv` for every flag not already given,
/// and removes the `--config` flag itself.
pub fn merge_config(argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let args: Vec<String> = argv
        .into_iter()
        .map(|a| a.into_string().map_err(|a| anyhow::anyhow!("non-UTF-8 argument {a:?}")))
        .collect::<Result<_>>()?;
    let Some(path) = config_path(&args)? else {
        return Ok(args.into_iter().map(OsString::from).collect());
    };
    let text = fs::read_to_string(Path::new(&path))
        .with_context(|| format!("reading config file {path}"))?;
    let entries = parse_config(&text)?;

    let mut merged: Vec<String> = Vec::with_capacity(args.len());
    let mut iter = args.iter();
    while let Some(a) = iter.next() {
        if a == "--config" {
            iter.next();
        } else if !a.starts_with("--config=") {
            merged.push(a.clone());
        }
    }
    let given = merged.clone();
    let shadowed = |key: &str| {
        ALTERNATIVES.iter().any(|(left, right)| {
            (left.contains(&key) && right.iter().any(|k| flag_present(&given, k)))
                || (right.contains(&key) && left.iter().any(|k| flag_present(&given, k)))
        })
    };
    for (key, value) in entries {
        if flag_present(&given, &key) || shadowed(&key) {
            continue;
        }
        merged.push(format!("--{key}"));
        merged.push(value);
    }
    Ok(merged.into_iter().map(OsString::from).collect())
}
