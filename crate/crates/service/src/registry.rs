//! Model files found in the configured directory.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use gasrotor_core::surrogate::{model_from_bytes, ModelMetadata, SurrogateModel};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MODEL_EXTENSION: &str = "grsm";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelStatus {
    Valid,
    Invalid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEntry {
    pub name: String,
    pub path: PathBuf,
    pub status: ModelStatus,
    /// SHA-256 of the file, hex.
    pub digest: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<ModelMetadata>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub loaded: bool,
}

#[derive(Debug, Default)]
pub struct ModelRegistry {
    pub entries: Vec<ModelEntry>,
    pub loaded: Option<Arc<SurrogateModel>>,
}

fn read_entry(path: &Path) -> (ModelEntry, Option<SurrogateModel>) {
    let name = path.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
    let mut entry = ModelEntry {
        name,
        path: path.to_path_buf(),
        status: ModelStatus::Invalid,
        digest: String::new(),
        metadata: None,
        error: None,
        loaded: false,
    };
    let bytes = match std::fs::read(path) {
        Ok(b) => b,
        Err(e) => {
            entry.error = Some(e.to_string());
            return (entry, None);
        }
    };
    entry.digest = hex::encode(Sha256::digest(&bytes));
    match model_from_bytes(&bytes) {
        Ok(model) => {
            entry.status = ModelStatus::Valid;
            entry.metadata = Some(model.metadata.clone());
            (entry, Some(model))
        }
        Err(e) => {
            entry.error = Some(e.to_string());
            (entry, None)
        }
    }
}

impl ModelRegistry {
    /// Scan `dir` for model files and load `preferred` if given and valid,
    /// else the first valid file by name. Invalid files are listed, never loaded.
    pub fn scan(dir: Option<&Path>, preferred: Option<&Path>) -> std::io::Result<Self> {
        let mut paths: Vec<PathBuf> = match dir {
            Some(d) => std::fs::read_dir(d)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == MODEL_EXTENSION))
                .collect(),
            None => Vec::new(),
        };
        paths.sort();
        if let Some(p) = preferred {
            if !paths.iter().any(|q| same_file(q, p)) {
                paths.insert(0, p.to_path_buf());
            }
        }
        let mut entries = Vec::with_capacity(paths.len());
        let mut models = Vec::with_capacity(paths.len());
        for p in &paths {
            let (entry, model) = read_entry(p);
            entries.push(entry);
            models.push(model);
        }
        let chosen = match preferred {
            Some(p) => paths.iter().position(|q| same_file(q, p)).filter(|&k| models[k].is_some()),
            None => models.iter().position(Option::is_some),
        };
        let loaded = chosen.and_then(|k| {
            entries[k].loaded = true;
            models[k].take().map(Arc::new)
        });
        Ok(Self { entries, loaded })
    }

    pub fn loaded_entry(&self) -> Option<&ModelEntry> {
        self.entries.iter().find(|e| e.loaded)
    }
}

fn same_file(a: &Path, b: &Path) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(x), Ok(y)) => x == y,
        _ => a == b,
    }
}
