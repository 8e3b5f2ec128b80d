//! `--config` files: `key=value` per line, keys spelled like the long flags.

use std::ffi::OsString;
use std::path::Path;

use clap::parser::ValueSource;
use clap::{ArgMatches, Command};

use crate::error::CliError;

/// Written into every header; accepted and checked, never turned into flags.
const RESERVED: [&str; 3] = ["version", "schema", "command"];

/// Parsed entries in file order. Lines without `=` are skipped, so a whole
/// CSV written by this tool is a valid config.
pub fn parse(text: &str, path: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let line = line.strip_prefix('#').map(str::trim_start).unwrap_or(line);
        let Some((key, value)) = line.split_once('=') else {
            continue;
        };
        let key = key.trim();
        if key.is_empty()
            || !key
                .chars()
                .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '-')
        {
            return Err(CliError::Config {
                path: path.into(),
                msg: format!("line {}: bad key {key:?}", idx + 1),
            });
        }
        if out.iter().any(|(k, _)| k == key) {
            return Err(CliError::Config {
                path: path.into(),
                msg: format!("line {}: duplicate key {key:?}", idx + 1),
            });
        }
        out.push((key.to_string(), value.trim().to_string()));
    }
    Ok(out)
}

/// Extra `--key=value` arguments for every config entry the command line and
/// environment leave unset.
pub fn overrides(
    cmd: &Command,
    matches: &ArgMatches,
    entries: &[(String, String)],
    path: &str,
) -> Result<Vec<OsString>, CliError> {
    let (sub_name, sub_matches) = matches.subcommand().expect("subcommand is required");
    let sub = cmd.find_subcommand(sub_name).expect("matched subcommand exists");
    let mut extra = Vec::new();
    for (key, value) in entries {
        match key.as_str() {
            "command" if value != sub_name => {
                return Err(CliError::Config {
                    path: path.into(),
                    msg: format!("written for `{value}`, not `{sub_name}`"),
                })
            }
            k if RESERVED.contains(&k) => continue,
            "config" => {
                return Err(CliError::Config {
                    path: path.into(),
                    msg: "config files cannot include other config files".into(),
                })
            }
            _ => {}
        }
        let arg = sub
            .get_arguments()
            .chain(cmd.get_arguments())
            .find(|a| a.get_long() == Some(key.as_str()))
            .ok_or_else(|| CliError::Config {
                path: path.into(),
                msg: format!("`{key}` is not a flag of `{sub_name}`"),
            })?;
        let id = arg.get_id().as_str();
        let source_in = |m: &ArgMatches| {
            m.try_contains_id(id)
                .ok()
                .filter(|&known| known)
                .and_then(|_| m.value_source(id))
        };
        let source = source_in(sub_matches).or_else(|| source_in(matches));
        if matches!(source, Some(ValueSource::CommandLine | ValueSource::EnvVariable)) {
            continue;
        }
        extra.push(OsString::from(format!("--{key}={value}")));
    }
    Ok(extra)
}

pub fn read(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: shown.clone(),
        source,
    })?;
    parse(&text, &shown)
}
