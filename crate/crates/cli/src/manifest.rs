use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Writes through a temporary sibling and renames it into place, so a
/// reader never sees a half-written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    fs::write(&tmp, bytes).map_err(|e| CliError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

#[derive(Debug, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

/// Record of one subcommand run, stored next to its outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: serde_json::Value,
    pub grid_hash: Option<String>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub notes: Vec<String>,
    pub elapsed_ms: u128,
}

/// Collects output files of a run and writes them atomically.
pub struct OutputDir {
    dir: PathBuf,
    written: Vec<FileDigest>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn put(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        write_atomic(&path, bytes)?;
        self.written.push(FileDigest {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
        });
        Ok(path)
    }

    pub fn finish(self, mut manifest: RunManifest) -> Result<PathBuf, CliError> {
        manifest.outputs = self.written;
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        let path = self.dir.join(format!("manifest-{}.json", manifest.command));
        write_atomic(&path, text.as_bytes())?;
        Ok(path)
    }
}

pub fn digest_input(path: &Path) -> Result<FileDigest, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(FileDigest {
        path: path.display().to_string(),
        sha256: sha256_hex(&bytes),
    })
}
