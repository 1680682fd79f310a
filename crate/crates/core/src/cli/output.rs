//! CSV and manifest persistence. Every file is written to a temporary file in
//! the target directory and renamed into place, so an interrupted run never
//! leaves a partial output behind.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use tempfile::NamedTempFile;

use crate::error::{Error, Result};
use crate::experiments::{StudyConfig, StudyResult, Value};

/// Shortest decimal that round-trips to the same `f64`.
pub fn format_value(value: &Value) -> String {
    match value {
        Value::Text(s) => s.clone(),
        Value::Int(i) => i.to_string(),
        Value::Float(f) => f.to_string(),
        Value::Empty => String::new(),
    }
}

pub fn csv_bytes(result: &StudyResult) -> Result<Vec<u8>> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    writer.write_record(&result.columns)?;
    for row in &result.rows {
        writer.write_record(row.iter().map(format_value))?;
    }
    writer
        .into_inner()
        .map_err(|e| Error::io("<csv buffer>", e.into_error()))
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn write_csv(result: &StudyResult, path: &Path) -> Result<()> {
    write_atomic(path, &csv_bytes(result)?)
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_path: Option<PathBuf>,
    pub config: Option<StudyConfig>,
    pub base_seed: Option<u64>,
    pub sample_seeds: Vec<u64>,
    /// Cells per grid of exponent `k` and how point values map onto them.
    pub cell_convention: &'static str,
    pub version: &'static str,
    pub outputs: Vec<PathBuf>,
    pub duration_seconds: f64,
}

pub const CELL_CONVENTION: &str = "2^k cells per grid; fBm path of 2^k+1 points, cell i takes the point at its left edge";

pub fn write_manifest(manifest: &RunManifest, path: &Path) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(manifest)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}
