use std::path::{Path, PathBuf};
use thiserror::Error;

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    InFile {
        path: PathBuf,
        #[source]
        source: deepopt::Error,
    },

    #[error("invalid experiment config: {0}")]
    Config(String),

    #[error("output directory {} already contains results (use --force to overwrite)", .0.display())]
    OutputExists(PathBuf),

    #[error("{0}")]
    Data(String),

    #[error(transparent)]
    Core(#[from] deepopt::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.to_owned(),
            source,
        }
    }
}
