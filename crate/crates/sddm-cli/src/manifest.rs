//! Run manifests: a record of the command, its input files (with content
//! hashes), the resolved configuration, and the tool version, emitted on
//! stderr for every run and alongside `--out` files for archival.

use crate::error::CliError;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Debug, Serialize)]
pub struct InputFile {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<InputFile>,
    /// Resolved option values that shaped this run.
    pub config: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub tool_version: String,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            command: command.to_string(),
            inputs: Vec::new(),
            config: serde_json::Value::Object(serde_json::Map::new()),
            seed: None,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339(),
        }
    }

    /// Registers an input file and its content hash.
    pub fn add_input(&mut self, path: &Path) -> Result<(), CliError> {
        let bytes = std::fs::read(path)
            .map_err(|e| CliError::input(path.display(), e))?;
        let digest = Sha256::digest(&bytes);
        self.inputs.push(InputFile {
            path: path.display().to_string(),
            sha256: format!("{digest:x}"),
        });
        Ok(())
    }

    /// Records one resolved configuration value.
    pub fn set(&mut self, key: &str, value: impl Serialize) {
        if let serde_json::Value::Object(map) = &mut self.config {
            map.insert(
                key.to_string(),
                serde_json::to_value(value).expect("config values serialize"),
            );
        }
    }

    /// Prints the manifest to stderr and, when an output path is in use,
    /// writes a pretty-printed sibling `<out>.manifest.json`.
    pub fn emit(&self, out: Option<&Path>) -> Result<(), CliError> {
        let line = serde_json::to_string(self).expect("manifest serializes");
        eprintln!("manifest: {line}");
        if let Some(out) = out {
            let mut path = PathBuf::from(out);
            let mut name = path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            name.push_str(".manifest.json");
            path.set_file_name(name);
            let pretty = serde_json::to_string_pretty(self).expect("manifest serializes");
            std::fs::write(&path, pretty + "\n")
                .map_err(|e| CliError::input(path.display(), e))?;
        }
        Ok(())
    }
}
