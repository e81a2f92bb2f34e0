//! Pipeline orchestration behind the `intrafirm` binary.

pub mod config;
pub mod pipeline;

use std::path::{Path, PathBuf};

use intrafirm_core::ingest::IngestError;
use intrafirm_core::motif::MotifError;
use intrafirm_ergm::{BindError, EstimationError, SamplerError};
use thiserror::Error;

pub use config::{Overrides, RunConfig};
pub use pipeline::{run_pipeline, Context, ModeOutcome, RunReport};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Estimation(String),
    #[error("{0}")]
    Io(String),
    #[error("missing artifact {} (produced by `intrafirm {producer}`)", path.display())]
    MissingArtifact { path: PathBuf, producer: &'static str },
    #[error("{mode}: {stage}: {source}")]
    Stage {
        mode: String,
        stage: &'static str,
        source: Box<CliError>,
    },
}

impl CliError {
    /// 1 validation, 2 estimation, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Estimation(_) => 2,
            CliError::Io(_) | CliError::MissingArtifact { .. } => 3,
            CliError::Stage { source, .. } => source.exit_code(),
        }
    }

    pub fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    pub fn in_stage(self, mode: &str, stage: &'static str) -> Self {
        CliError::Stage {
            mode: mode.to_string(),
            stage,
            source: Box::new(self),
        }
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        match &e {
            IngestError::Io { .. } => CliError::Io(e.to_string()),
            IngestError::Csv { source, .. } if source.is_io_error() => CliError::Io(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<MotifError> for CliError {
    fn from(e: MotifError) -> Self {
        match e {
            MotifError::Csv { .. } => CliError::Io(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<BindError> for CliError {
    fn from(e: BindError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<EstimationError> for CliError {
    fn from(e: EstimationError) -> Self {
        CliError::Estimation(e.to_string())
    }
}

impl From<SamplerError> for CliError {
    fn from(e: SamplerError) -> Self {
        CliError::Estimation(e.to_string())
    }
}
