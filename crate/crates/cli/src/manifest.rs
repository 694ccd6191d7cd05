//! Run manifests and atomic file output.

use serde::Serialize;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;
use tempfile::NamedTempFile;

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub version: String,
    pub wall_time_s: f64,
}

/// Collects what a command read and wrote while it runs.
pub struct Recorder {
    command: String,
    parameters: BTreeMap<String, String>,
    inputs: Vec<String>,
    outputs: Vec<String>,
    start: Instant,
}

impl Recorder {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            parameters: BTreeMap::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            start: Instant::now(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) {
        self.parameters.insert(key.to_string(), value.to_string());
    }

    pub fn input(&mut self, path: &Path) {
        self.inputs.push(path.display().to_string());
    }

    /// Writes `bytes` to `path` atomically and records it as an output.
    pub fn write(&mut self, path: &Path, bytes: &[u8]) -> std::io::Result<()> {
        write_atomic(path, bytes)?;
        self.outputs.push(path.display().to_string());
        Ok(())
    }

    /// Writes the manifest itself to `path`.
    pub fn finish(self, path: &Path) -> std::io::Result<RunManifest> {
        let manifest = RunManifest {
            command: self.command,
            parameters: self.parameters,
            inputs: self.inputs,
            outputs: self.outputs,
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_s: self.start.elapsed().as_secs_f64(),
        };
        let mut json = serde_json::to_vec_pretty(&manifest).map_err(std::io::Error::other)?;
        json.push(b'\n');
        write_atomic(path, &json)?;
        Ok(manifest)
    }
}

/// Temp file in the target directory, then rename over the target.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// `out.txt` → `out.txt.manifest.json`.
pub fn manifest_path_for(file: &Path) -> PathBuf {
    let mut name = file.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    file.with_file_name(name)
}
