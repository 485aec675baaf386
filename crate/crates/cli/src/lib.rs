//! Batch runner, heatmap renderer and report export for the `spacefield` command.

pub mod batch;
pub mod config;
pub mod render;
pub mod report;
pub mod sample;

use std::path::PathBuf;

use spacefield::space_data::DataError;
use spacefield::ModelError;
use thiserror::Error;

pub use batch::{run_batch, BatchFailure, BatchOutcome, ManifestEntry};
pub use config::{RunConfig, SpaceModel};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Model(#[from] ModelError),

    #[error(transparent)]
    Data(#[from] DataError),

    #[error("geometry mismatch: {0}")]
    Geometry(String),

    #[error("render: {0}")]
    Render(String),

    #[error("report: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> CliError {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

/// Lowercase hex SHA-256.
pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    use std::fmt::Write;
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}
