use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::{io_failure, Failure};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Serialize)]
pub struct Artifact {
    /// Relative to the output directory.
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct ConfigRef {
    pub path: String,
    pub sha256: String,
}

/// Record of one invocation; every file written is listed with its hash.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config: Option<ConfigRef>,
    pub seed: Option<u64>,
    pub output_dir: PathBuf,
    pub artifacts: Vec<Artifact>,
}

fn sha256_of(path: &Path) -> Result<String, Failure> {
    let bytes = std::fs::read(path).map_err(|e| io_failure(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

impl RunManifest {
    pub fn new(output_dir: &Path, seed: Option<u64>) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: None,
            seed,
            output_dir: output_dir.to_path_buf(),
            artifacts: Vec::new(),
        }
    }

    pub fn set_config(&mut self, path: &Path) -> Result<(), Failure> {
        self.config = Some(ConfigRef {
            path: path.display().to_string(),
            sha256: sha256_of(path)?,
        });
        Ok(())
    }

    pub fn add(&mut self, path: &Path) -> Result<(), Failure> {
        let rel = path.strip_prefix(&self.output_dir).unwrap_or(path);
        self.artifacts.push(Artifact {
            path: rel.display().to_string(),
            sha256: sha256_of(path)?,
        });
        Ok(())
    }

    pub fn write(&self) -> Result<(), Failure> {
        let path = self.output_dir.join(MANIFEST_NAME);
        let text = serde_json::to_string_pretty(self).map_err(|e| io_failure(&path, e))?;
        std::fs::write(&path, text + "\n").map_err(|e| io_failure(&path, e))
    }
}
