//! JSON Lines input and report output.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One line of a score report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreRecord {
    pub metric: String,
    pub value: f64,
    /// Number of scored items (images, frames, lanes or pixels).
    pub support: usize,
}

/// Reads one JSON value per non-blank line.
pub fn read_jsonl<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::Format(format!("{}:{}: {e}", path.display(), i + 1))))
        .collect()
}

/// Writes the records as a JSON array.
pub fn write_reports(records: &[ScoreRecord], path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, serde_json::to_vec_pretty(records)?)?;
    Ok(())
}

/// Writes `metric,value,support` rows with a header.
pub fn write_csv(records: &[ScoreRecord], path: impl AsRef<Path>) -> Result<()> {
    let mut out = Vec::new();
    writeln!(out, "metric,value,support")?;
    for r in records {
        writeln!(out, "{},{},{}", r.metric, r.value, r.support)?;
    }
    fs::write(path, out)?;
    Ok(())
}
