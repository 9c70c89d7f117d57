//! Deterministic output plumbing: fixed-precision reals, RFC 4180 fields,
//! run directories, and the manifest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rankdrift::ingest::csv_field;
use serde::Serialize;

use crate::{CliError, CliResult};

/// Ten significant digits in scientific notation, so goldens are byte-stable.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.9e}")
}

/// Refuses to write into a non-empty directory unless forced.
pub fn prepare_out_dir(out: &Path, force: bool) -> CliResult<()> {
    if out.exists() {
        let occupied = std::fs::read_dir(out)
            .map_err(|e| CliError::Usage(format!("cannot inspect {}: {e}", out.display())))?
            .next()
            .is_some();
        if occupied && !force {
            return Err(CliError::Usage(format!(
                "output directory {} is not empty; pass --force to overwrite",
                out.display()
            )));
        }
    }
    std::fs::create_dir_all(out)
        .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", out.display())))?;
    Ok(())
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> CliResult<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

/// Word-by-time grid as CSV: `word` column, then one column per label.
pub fn grid_csv<T: Copy>(
    words: &[String],
    labels: &[String],
    rows: usize,
    cols: usize,
    get: impl Fn(usize, usize) -> T,
    fmt: impl Fn(T) -> String,
) -> String {
    let mut out = String::from("word");
    for label in labels {
        out.push(',');
        out.push_str(label);
    }
    out.push('\n');
    for (w, word) in words.iter().enumerate().take(rows) {
        out.push_str(&csv_field(word));
        for t in 0..cols {
            out.push(',');
            let _ = write!(out, "{}", fmt(get(w, t)));
        }
        out.push('\n');
    }
    out
}

/// Serialized run description; feeding it back through --config reproduces
/// the outputs byte-identically.
#[derive(Serialize)]
pub struct Manifest<C: Serialize> {
    pub command: &'static str,
    pub config: C,
    pub input_paths: Vec<PathBuf>,
    pub output_dir: PathBuf,
    pub version: &'static str,
}

pub fn write_manifest<C: Serialize>(dir: &Path, manifest: &Manifest<C>) -> CliResult<()> {
    let json = serde_json::to_string_pretty(manifest)
        .map_err(|e| CliError::Runtime(format!("manifest serialization failed: {e}")))?;
    write_file(dir, "manifest.json", &format!("{json}\n"))?;
    Ok(())
}

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
