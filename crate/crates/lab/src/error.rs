use std::path::PathBuf;

use modneat::env::EnvError;
use modneat::map_elites::MapElitesError;
use modneat::neat::{GenomeError, NeatError};
use modneat::objectives::ObjectiveError;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Neat(#[from] NeatError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    MapElites(#[from] MapElitesError),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error("invalid genome: {0}")]
    Genome(#[from] GenomeError),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

impl LabError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl std::fmt::Display) -> Self {
        LabError::Format {
            path: path.into(),
            message: message.to_string(),
        }
    }

    /// 2 for usage, I/O and input-format problems, 1 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Io { .. } | LabError::Format { .. } | LabError::Config(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;
