//! CSV text and the run manifest.
//!
//! Numbers are written in shortest round-trip form (exponent notation for
//! very small or large values), so equal values always give equal bytes and
//! re-runs checksum identically.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// An output file held in memory until the run finishes.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputFile {
    pub name: String,
    pub contents: String,
}

impl OutputFile {
    pub fn new(name: impl Into<String>, contents: String) -> Self {
        Self {
            name: name.into(),
            contents,
        }
    }
}

/// CSV with a header row; every row must match the header width.
pub fn csv_table(header: &[String], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// `key=value` lines, each prefixed by `prefix`.
pub fn key_values(prefix: &str, pairs: &[(String, String)]) -> String {
    pairs
        .iter()
        .map(|(k, v)| format!("{prefix}{k}={v}\n"))
        .collect()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileChecksum {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact_version: String,
    /// SHA-256 of the canonical JSON of the configuration or recipe.
    pub config_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub wall_clock_seconds: f64,
    pub outputs: Vec<FileChecksum>,
}

impl RunManifest {
    pub fn checksums(&self) -> Vec<(String, String)> {
        self.outputs
            .iter()
            .map(|f| (f.file.clone(), f.sha256.clone()))
            .collect()
    }
}

/// Writes every file (in name order) and then `manifest.json`.
pub fn write_outputs(
    dir: &Path,
    files: &[OutputFile],
    config_hash: String,
    seed: Option<u64>,
    elapsed: Duration,
) -> CliResult<RunManifest> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut sorted: Vec<&OutputFile> = files.iter().collect();
    sorted.sort_by(|a, b| a.name.cmp(&b.name));
    let mut outputs = Vec::with_capacity(files.len());
    for f in sorted {
        let path: PathBuf = dir.join(&f.name);
        std::fs::write(&path, &f.contents).map_err(|e| CliError::io(&path, e))?;
        outputs.push(FileChecksum {
            file: f.name.clone(),
            sha256: sha256_hex(f.contents.as_bytes()),
        });
    }
    let manifest = RunManifest {
        artifact_version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash,
        seed,
        wall_clock_seconds: elapsed.as_secs_f64(),
        outputs,
    };
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
    Ok(manifest)
}
