//! Run records, digests and the per-run manifest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use sha2::{Digest, Sha256};

use crate::config::{Mode, RunConfig};
use crate::error::{LabError, Result};

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Digest of the tool version and the canonical configuration text.
pub fn config_digest(config: &RunConfig) -> Result<String> {
    let text = format!("{TOOL_VERSION}\n{}", config.canonical()?);
    Ok(sha256_hex(text.as_bytes()))
}

/// One exported file, relative to the run directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExportFile {
    pub name: String,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub digest: String,
    pub mode: Mode,
    pub outcome: String,
    /// Ordered `(key, value)` pairs shown in the manifest and on the console.
    pub summary: Vec<(String, String)>,
    /// Elapsed time; reported on the console only, never written to disk.
    pub wall_time: Duration,
    pub tool_version: &'static str,
}

impl RunRecord {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

/// Result of a run: its record and every file it exports.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub record: RunRecord,
    pub config: RunConfig,
    pub files: Vec<ExportFile>,
}

fn quoted(s: &str) -> String {
    toml::Value::String(s.to_owned()).to_string()
}

impl RunOutput {
    /// `<mode>-<first 16 hex digits of the digest>`
    pub fn dir_name(&self) -> String {
        format!("{}-{}", self.record.mode.label(), &self.record.digest[..16])
    }

    /// Flat `key = value` manifest listing the digest, outcome, summary and
    /// a checksum for every exported file.
    pub fn manifest(&self) -> String {
        let r = &self.record;
        let mut out = String::new();
        let _ = writeln!(out, "digest = {}", quoted(&r.digest));
        let _ = writeln!(out, "tool_version = {}", quoted(r.tool_version));
        let _ = writeln!(out, "mode = {}", quoted(r.mode.label()));
        let _ = writeln!(out, "outcome = {}", quoted(&r.outcome));
        for (k, v) in &r.summary {
            let _ = writeln!(out, "summary.{k} = {}", quoted(v));
        }
        for (i, f) in self.files.iter().enumerate() {
            let _ = writeln!(out, "files.{i}.name = {}", quoted(&f.name));
            let _ = writeln!(out, "files.{i}.sha256 = {}", quoted(&sha256_hex(&f.bytes)));
        }
        out
    }

    /// Writes `config.txt`, `manifest.txt` and all exports under `root/<dir_name>`.
    pub fn persist(&self, root: &Path) -> Result<PathBuf> {
        let dir = root.join(self.dir_name());
        let write = |name: &str, bytes: &[u8]| -> Result<()> {
            let path = dir.join(name);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent).map_err(|e| LabError::io(parent, e))?;
            }
            std::fs::write(&path, bytes).map_err(|e| LabError::io(&path, e))
        };
        write("config.txt", self.config.canonical()?.as_bytes())?;
        for f in &self.files {
            write(&f.name, &f.bytes)?;
        }
        write("manifest.txt", self.manifest().as_bytes())?;
        Ok(dir)
    }
}
