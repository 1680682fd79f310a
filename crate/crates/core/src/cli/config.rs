//! `key = value` study configuration files.
//!
//! ```text
//! # comments run to the end of the line
//! equation = burgers
//! numflux = godunov
//! hurst = 0.25, 0.5, 0.75
//! resolutions = 5, 6, 7, 8, 9
//! reference_exponent = 11
//! samples = 16
//! base_seed = 1
//! ```

use std::collections::HashMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::experiments::StudyConfig;
use crate::solver::{Boundary, DEFAULT_CFL};

pub const KEYS: [&str; 12] = [
    "equation",
    "numflux",
    "hurst",
    "resolutions",
    "reference_exponent",
    "t_final",
    "samples",
    "base_seed",
    "cfl",
    "boundary",
    "snapshot_times",
    "beta",
];

pub const REQUIRED_KEYS: [&str; 7] = [
    "equation",
    "numflux",
    "hurst",
    "resolutions",
    "reference_exponent",
    "samples",
    "base_seed",
];

pub const DEFAULT_T_FINAL: f64 = 1.0;

pub fn parse_config(path: &Path) -> Result<StudyConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_str(&text)
}

struct Entry<'a> {
    line: usize,
    value: &'a str,
}

fn config_err(line: usize, key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        key: key.to_owned(),
        message: message.into(),
    }
}

fn scalar<T>(entry: &Entry, key: &str) -> Result<T>
where
    T: FromStr,
    T::Err: std::fmt::Display,
{
    entry
        .value
        .parse()
        .map_err(|e| config_err(entry.line, key, format!("cannot parse `{}`: {e}", entry.value)))
}

fn list<T>(entry: &Entry, key: &str) -> Result<Vec<T>>
where
    T: FromStr,
    T::Err: std::fmt::Display,
{
    if entry.value.is_empty() {
        return Ok(Vec::new());
    }
    entry
        .value
        .split(',')
        .map(|item| {
            let item = item.trim();
            item.parse()
                .map_err(|e| config_err(entry.line, key, format!("cannot parse list item `{item}`: {e}")))
        })
        .collect()
}

pub fn parse_config_str(text: &str) -> Result<StudyConfig> {
    let mut entries: HashMap<&str, Entry> = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| config_err(line, content, "expected `key = value`"))?;
        let key = key.trim();
        let value = value.trim();
        if !KEYS.contains(&key) {
            return Err(config_err(line, key, "unknown key"));
        }
        if let Some(first) = entries.get(key) {
            return Err(config_err(
                line,
                key,
                format!("duplicate key (first set on line {})", first.line),
            ));
        }
        entries.insert(key, Entry { line, value });
    }
    if let Some(missing) = REQUIRED_KEYS.iter().find(|k| !entries.contains_key(*k)) {
        return Err(Error::Validation(format!("missing required key `{missing}`")));
    }

    let get = |key: &str| entries.get(key);
    let req = |key: &str| &entries[key];

    let cfg = StudyConfig {
        equation: scalar(req("equation"), "equation")?,
        numflux: scalar(req("numflux"), "numflux")?,
        hurst: list(req("hurst"), "hurst")?,
        resolutions: list(req("resolutions"), "resolutions")?,
        reference_exponent: scalar(req("reference_exponent"), "reference_exponent")?,
        t_final: get("t_final").map(|e| scalar(e, "t_final")).transpose()?.unwrap_or(DEFAULT_T_FINAL),
        n_samples: scalar(req("samples"), "samples")?,
        base_seed: scalar(req("base_seed"), "base_seed")?,
        cfl: get("cfl").map(|e| scalar(e, "cfl")).transpose()?.unwrap_or(DEFAULT_CFL),
        boundary: get("boundary")
            .map(|e| scalar::<Boundary>(e, "boundary"))
            .transpose()?
            .unwrap_or(Boundary::Outflow),
        snapshot_times: get("snapshot_times")
            .map(|e| list(e, "snapshot_times"))
            .transpose()?
            .unwrap_or_default(),
        beta: get("beta").map(|e| scalar(e, "beta")).transpose()?,
    };
    cfg.validate()?;
    Ok(cfg)
}
