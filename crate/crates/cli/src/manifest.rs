//! Run manifests: what was run, on which inputs, with which build.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::failure::{CliResult, Failure, EXIT_PARSE};

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    /// sha256 of every input file, keyed by the path as given.
    pub inputs: BTreeMap<String, String>,
    pub outputs: Vec<String>,
    pub wall_seconds: f64,
}

pub struct Recorder {
    command: String,
    started: Instant,
    inputs: BTreeMap<String, String>,
    outputs: Vec<String>,
}

impl Recorder {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            started: Instant::now(),
            inputs: BTreeMap::new(),
            outputs: Vec::new(),
        }
    }

    /// Reads an input file, remembering its hash.
    pub fn read(&mut self, path: &Path) -> CliResult<Vec<u8>> {
        let bytes = fs::read(path).map_err(|e| {
            Failure::new(EXIT_PARSE, format!("cannot read {}: {e}", path.display()))
        })?;
        self.inputs
            .insert(path.display().to_string(), sha256_hex(&bytes));
        Ok(bytes)
    }

    pub fn read_string(&mut self, path: &Path) -> CliResult<String> {
        let bytes = self.read(path)?;
        String::from_utf8(bytes)
            .map_err(|_| Failure::new(EXIT_PARSE, format!("{} is not UTF-8", path.display())))
    }

    pub fn write(&mut self, path: &Path, contents: &[u8]) -> CliResult {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| Failure::write(dir, e))?;
        }
        fs::write(path, contents).map_err(|e| Failure::write(path, e))?;
        self.outputs.push(path.display().to_string());
        Ok(())
    }

    /// Writes the manifest to `path` and returns it.
    pub fn finish<C: Serialize>(
        self,
        path: &Path,
        config: &C,
        seed: Option<u64>,
    ) -> CliResult<RunManifest> {
        let manifest = RunManifest {
            command: self.command,
            tool_version: format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
            config: serde_json::to_value(config).expect("configs serialize"),
            seed,
            inputs: self.inputs,
            outputs: self.outputs,
            wall_seconds: self.started.elapsed().as_secs_f64(),
        };
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        fs::write(path, text + "\n").map_err(|e| Failure::write(path, e))?;
        Ok(manifest)
    }
}

/// `out.csv` -> `out.manifest.json`.
pub fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}
