use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, LabError>;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("config {path}: {reason}")]
    Config { path: String, reason: String },
    #[error("invalid config: {0}")]
    Validation(String),
    #[error("{stage}: {source}")]
    Stage {
        stage: String,
        #[source]
        source: qergo_core::Error,
    },
    #[error("no manifest.json in {0} or its subdirectories")]
    MissingManifest(PathBuf),
    #[error("corrupt manifest {path}: {reason}")]
    CorruptManifest { path: PathBuf, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl LabError {
    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> LabError {
        let path = path.into();
        move |source| LabError::Io { path, source }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>) -> impl FnOnce(csv::Error) -> LabError {
        let path = path.into();
        move |source| LabError::Csv { path, source }
    }
}

/// Attaches the name of the failing stage to core errors.
pub(crate) trait StageExt<T> {
    fn stage(self, name: impl FnOnce() -> String) -> Result<T>;
}

impl<T> StageExt<T> for qergo_core::Result<T> {
    fn stage(self, name: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|source| LabError::Stage { stage: name(), source })
    }
}
