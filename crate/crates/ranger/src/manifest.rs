//! Run manifests. Timing lives here and nowhere else, so data payloads stay
//! byte-identical between runs.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::AppError;

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    /// SHA-256 of the resolved inputs (SI config, noise, protocol, options).
    pub config_hash: String,
    pub seed: Option<u64>,
    pub jobs: usize,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub wall_clock_s: f64,
    /// Simulated measurements per second of wall-clock time, when meaningful.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub throughput_per_s: Option<f64>,
}

/// Hash of a serializable description of every resolved input.
pub fn config_hash<T: Serialize>(resolved: &T) -> String {
    let canonical = serde_json::to_vec(resolved).expect("resolved inputs serialize");
    hex::encode(Sha256::digest(&canonical))
}

impl RunManifest {
    pub fn path_in(dir: &Path, command: &str) -> PathBuf {
        dir.join(format!("manifest-{command}.json"))
    }

    pub fn write(&self, path: &Path) -> Result<(), AppError> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, text + "\n").map_err(|e| AppError::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_tracks_every_field() {
        let a = config_hash(&(1.0f64, "x"));
        assert_eq!(a, config_hash(&(1.0f64, "x")));
        assert_ne!(a, config_hash(&(1.0000000001f64, "x")));
        assert_eq!(a.len(), 64);
    }
}
