//! Append-only run manifest: one JSON object per command invocation in
//! `manifest.jsonl`, listing every emitted artifact with its SHA-256.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliResult;

#[derive(Debug, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct ManifestEntry {
    pub command: String,
    pub version: String,
    pub unix_time: u64,
    pub seed: u64,
    pub config_path: String,
    pub config_sha256: String,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

pub fn sha256_file(path: &Path) -> CliResult<String> {
    let bytes = std::fs::read(path)?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    let digest = hasher.finalize();
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

pub fn digest_of(path: &Path) -> CliResult<FileDigest> {
    Ok(FileDigest { path: path.display().to_string(), sha256: sha256_file(path)? })
}

pub struct ManifestWriter {
    entry: ManifestEntry,
    out_dir: PathBuf,
}

impl ManifestWriter {
    pub fn new(command: &str, seed: u64, config_path: &Path, out_dir: &Path) -> CliResult<Self> {
        Ok(Self {
            entry: ManifestEntry {
                command: command.to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                unix_time: std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0),
                seed,
                config_path: config_path.display().to_string(),
                config_sha256: sha256_file(config_path).unwrap_or_else(|_| "missing".into()),
                inputs: Vec::new(),
                outputs: Vec::new(),
            },
            out_dir: out_dir.to_path_buf(),
        })
    }

    pub fn record_input(&mut self, path: &Path) -> CliResult<()> {
        self.entry.inputs.push(digest_of(path)?);
        Ok(())
    }

    pub fn record_output(&mut self, path: &Path) -> CliResult<()> {
        self.entry.outputs.push(digest_of(path)?);
        Ok(())
    }

    /// Append the entry to `<out>/manifest.jsonl`.
    pub fn commit(self) -> CliResult<()> {
        std::fs::create_dir_all(&self.out_dir)?;
        let path = self.out_dir.join("manifest.jsonl");
        let mut file = OpenOptions::new().create(true).append(true).open(path)?;
        let line = serde_json::to_string(&self.entry)?;
        writeln!(file, "{line}")?;
        Ok(())
    }
}
