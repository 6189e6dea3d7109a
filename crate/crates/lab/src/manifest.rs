//! `manifest.json`: everything needed to rerun an experiment and check its outputs.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::table::Aggregation;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const FORMAT: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub file: String,
    pub sha256: String,
    pub rows: usize,
    pub columns: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aggregation: Option<Aggregation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: u32,
    pub experiment: String,
    pub config_hash: String,
    /// Canonical config after overrides.
    pub config: serde_json::Value,
    pub seeds: Vec<u64>,
    pub versions: BTreeMap<String, String>,
    /// Seconds since the Unix epoch; the only time-dependent field of a run.
    pub created_unix: u64,
    pub tables: Vec<TableEntry>,
    #[serde(default)]
    pub files: Vec<FileEntry>,
    #[serde(default)]
    pub notes: Vec<String>,
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Manifest> {
        let text = std::fs::read_to_string(path).map_err(LabError::io(path))?;
        let m: Manifest = serde_json::from_str(&text)
            .map_err(|e| LabError::CorruptManifest { path: path.to_path_buf(), reason: e.to_string() })?;
        if m.format != FORMAT {
            return Err(LabError::CorruptManifest { path: path.to_path_buf(), reason: format!("unknown format {}", m.format) });
        }
        Ok(m)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text).map_err(LabError::io(path))
    }

    pub fn versions() -> BTreeMap<String, String> {
        BTreeMap::from([
            ("qergo".to_string(), env!("CARGO_PKG_VERSION").to_string()),
            ("qergo-core".to_string(), qergo_core::VERSION.to_string()),
        ])
    }
}
