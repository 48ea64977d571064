//! Configured experiment runs: stage execution, caching and report tables.

mod config;
mod report;
mod run;

pub use config::{ExperimentConfig, Stages};
pub use report::{report_render, RenderedTables};
pub use run::{
    run_pipeline, ArtifactEntry, Manifest, PipelineOutcome, StageStatus, VerifyArtifact,
    CACHE_DIR_ENV,
};

use crate::arith::ArithError;
use crate::forge::ForgeError;
use crate::harness::HarnessError;
use crate::partition::PartitionError;
use crate::quadrature::QuadError;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error("stage {stage} failed: {message}")]
    Stage { stage: String, message: String },
    #[error("missing artifact {0}")]
    MissingArtifact(String),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Forge(#[from] ForgeError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
