//! Run manifests written next to CLI outputs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: PathBuf,
    /// SHA-256 of the file, hex.
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// SHA-256 of the canonical JSON of `inputs`, hex.
    pub inputs_digest: String,
    pub inputs: serde_json::Value,
    pub outputs: Vec<OutputFile>,
    pub created_unix: u64,
}

pub fn file_digest(path: &Path) -> std::io::Result<String> {
    Ok(hex::encode(Sha256::digest(std::fs::read(path)?)))
}

/// `<out>.manifest.json`.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

impl RunManifest {
    pub fn new(command: &str, seed: Option<u64>, inputs: serde_json::Value, outputs: &[&Path]) -> std::io::Result<Self> {
        let outputs = outputs
            .iter()
            .map(|p| Ok(OutputFile { path: p.to_path_buf(), sha256: file_digest(p)? }))
            .collect::<std::io::Result<_>>()?;
        Ok(Self {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed,
            inputs_digest: hex::encode(Sha256::digest(inputs.to_string())),
            inputs,
            outputs,
            created_unix: crate::api::unix_now(),
        })
    }

    /// Write to the manifest path of the first output.
    pub fn write(&self) -> std::io::Result<PathBuf> {
        let first = self.outputs.first().map(|o| o.path.clone()).unwrap_or_else(|| PathBuf::from(&self.command));
        let path = manifest_path(&first);
        std::fs::write(&path, serde_json::to_vec_pretty(self).map_err(std::io::Error::other)?)?;
        Ok(path)
    }
}
