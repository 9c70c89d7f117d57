//! Config-file loading and flag merging. A config file is a flat JSON object
//! whose keys mirror the long flags; a manifest.json from a previous run also
//! works, in which case its embedded `config` object is used.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::{CliError, CliResult};

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
pub struct FileConfig {
    pub alpha: Option<f64>,
    pub beta: Option<u64>,
    pub vocab: Option<usize>,
    pub zipf_a: Option<f64>,
    pub steps: Option<usize>,
    pub seed: Option<u64>,
    pub replicates: Option<usize>,
    pub rbo_p: Option<f64>,
    pub lag: Option<usize>,
    pub input: Option<Vec<PathBuf>>,
    pub y_max: Option<usize>,
    pub min_volumes: Option<u64>,
    pub years: Option<String>,
    pub stopwords: Option<PathBuf>,
    pub swadesh: Option<PathBuf>,
    pub betas: Option<Vec<u64>>,
}

pub fn load(path: Option<&Path>) -> CliResult<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut value: serde_json::Value = serde_json::from_str(&text).map_err(|e| {
        CliError::Usage(format!("config {} is not valid JSON: {e}", path.display()))
    })?;
    // A manifest wraps the effective values in a "config" member.
    if let Some(inner) = value.get_mut("config") {
        if inner.is_object() {
            value = inner.take();
        }
    }
    serde_json::from_value(value)
        .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
}

/// Parses the inclusive A:B year interval syntax.
pub fn parse_years(spec: &str) -> CliResult<(i32, i32)> {
    let bad = || CliError::Usage(format!("--years expects A:B with integers, got '{spec}'"));
    let (a, b) = spec.split_once(':').ok_or_else(bad)?;
    let start = a.trim().parse::<i32>().map_err(|_| bad())?;
    let end = b.trim().parse::<i32>().map_err(|_| bad())?;
    if start > end {
        return Err(CliError::Usage(format!("--years range '{spec}' is empty")));
    }
    Ok((start, end))
}
