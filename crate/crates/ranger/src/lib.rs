//! File formats, parallel execution and the command-line front end for
//! `stretch-ranger-core`.
//!
//! Configuration files use unit-suffixed keys (`total_dispersion_ps_per_nm`,
//! `bpf_low_ghz`, ...) and are converted to SI on load. Every command writes
//! its data payloads plus a `manifest-<command>.json`; wall-clock time and
//! throughput appear only in the manifest.

use std::path::Path;

pub mod cli;
pub mod config;
pub mod formats;
pub mod manifest;
pub mod parallel;

use stretch_ranger_core::runner::MeasurementError;

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("{path}: {message}")]
    Parse { path: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Input(String),

    #[error(transparent)]
    Domain(#[from] stretch_ranger_core::Error),

    #[error(transparent)]
    Measurement(#[from] MeasurementError),

    #[error("{0}")]
    Failed(String),
}

impl AppError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        AppError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// 2 for unreadable or malformed input, 1 for domain failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Parse { .. } | AppError::Io { .. } | AppError::Input(_) => 2,
            AppError::Domain(_) | AppError::Measurement(_) | AppError::Failed(_) => 1,
        }
    }
}
