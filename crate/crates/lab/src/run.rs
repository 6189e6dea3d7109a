use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::config::ExperimentConfig;
use crate::error::{LabError, Result};
use crate::experiments::execute;
use crate::manifest::{FileEntry, Manifest, TableEntry, FORMAT, MANIFEST_FILE};
use crate::table::sha256_hex;

/// Environment variable naming the output root.
pub const OUTPUT_ROOT_ENV: &str = "QERGO_OUTPUT_ROOT";
pub const DEFAULT_OUTPUT_ROOT: &str = "qergo-out";

#[derive(Debug)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub manifest: Manifest,
}

/// Validates, runs and writes `root/<output>/`. Nothing is written when
/// validation or any sweep cell fails.
pub fn run(cfg: &ExperimentConfig, root: &Path) -> Result<RunOutcome> {
    cfg.validate()?;
    let out = execute(cfg)?;
    let dir = root.join(cfg.output_dir_name());
    std::fs::create_dir_all(&dir).map_err(LabError::io(&dir))?;
    let mut tables = Vec::new();
    for t in &out.tables {
        let sha256 = t.write(&dir)?;
        tables.push(TableEntry {
            file: t.file.clone(),
            sha256,
            rows: t.rows.len(),
            columns: t.columns.clone(),
            aggregation: t.aggregation.clone(),
        });
    }
    let mut files = Vec::new();
    for (name, bytes) in &out.files {
        let path = dir.join(name);
        std::fs::write(&path, bytes).map_err(LabError::io(&path))?;
        files.push(FileEntry { file: name.clone(), sha256: sha256_hex(bytes) });
    }
    let manifest = Manifest {
        format: FORMAT,
        experiment: cfg.experiment.name().to_string(),
        config_hash: cfg.hash(),
        config: serde_json::to_value(cfg)?,
        seeds: cfg.sweep.seeds.clone(),
        versions: Manifest::versions(),
        created_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        tables,
        files,
        notes: out.notes,
    };
    manifest.write(&dir.join(MANIFEST_FILE))?;
    Ok(RunOutcome { dir, manifest })
}

/// Output root from the environment, or the default.
pub fn output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ROOT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_ROOT))
}
