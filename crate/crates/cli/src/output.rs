//! CSV formatting and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{io_error, CliError, Result};

pub const MANIFEST_NAME: &str = "manifest.json";

/// Fixed 12-decimal rendering; `-0` prints as `0`.
pub fn format_value(v: f64) -> String {
    let s = format!("{v:.12}");
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s[1..].to_string()
    } else {
        s
    }
}

/// Writes `header` and `rows` as CSV to `path`.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    writer.write_record(header).map_err(|e| csv_error(path, e))?;
    for row in rows {
        writer
            .write_record(row.iter().map(|&v| format_value(v)))
            .map_err(|e| csv_error(path, e))?;
    }
    writer.flush().map_err(io_error(path))
}

pub(crate) fn csv_error(path: &Path, err: csv::Error) -> CliError {
    CliError::Csv {
        path: path.to_path_buf(),
        message: err.to_string(),
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created: Option<String>,
    /// The run config, or the options of commands that take none.
    pub config: serde_json::Value,
    pub files: Vec<FileEntry>,
}

impl Manifest {
    /// Hashes `files` (relative to `dir`) and records the config that made them.
    pub fn build(dir: &Path, command: &str, config: &RunConfig, files: &[&str]) -> Result<Self> {
        let echo = serde_json::to_value(config)?;
        Self::build_with(dir, command, echo, config.output.deterministic, files)
    }

    pub fn build_with(
        dir: &Path,
        command: &str,
        config: serde_json::Value,
        deterministic: bool,
        files: &[&str],
    ) -> Result<Self> {
        let mut entries = Vec::with_capacity(files.len());
        for name in files {
            let path = dir.join(name);
            let bytes = fs::read(&path).map_err(io_error(&path))?;
            entries.push(FileEntry {
                path: name.to_string(),
                sha256: sha256_hex(&bytes),
                bytes: bytes.len() as u64,
            });
        }
        let created = (!deterministic).then(|| chrono::Utc::now().to_rfc3339());
        Ok(Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            created,
            config,
            files: entries,
        })
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(MANIFEST_NAME);
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(&path, text).map_err(io_error(&path))?;
        Ok(path)
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_NAME);
        let text = fs::read_to_string(&path).map_err(io_error(&path))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Names of listed files whose current hash or size no longer matches.
    pub fn verify(&self, dir: &Path) -> Result<Vec<String>> {
        let mut stale = Vec::new();
        for entry in &self.files {
            let path = dir.join(&entry.path);
            let bytes = fs::read(&path).map_err(io_error(&path))?;
            if bytes.len() as u64 != entry.bytes || sha256_hex(&bytes) != entry.sha256 {
                stale.push(entry.path.clone());
            }
        }
        Ok(stale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_zero_is_normalized() {
        assert_eq!(format_value(-0.0), "0.000000000000");
        assert_eq!(format_value(-1e-15), "0.000000000000");
        assert_eq!(format_value(1.0), "1.000000000000");
        assert_eq!(format_value(-0.25), "-0.250000000000");
    }

    #[test]
    fn sha256_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
