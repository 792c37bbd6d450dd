use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub toolkit_version: String,
    pub seed: u64,
    pub config_sha256: String,
    /// Effective configuration after flag overrides, as TOML.
    pub config: String,
    pub wall_clock_s: f64,
    /// `ok`, `check-failed` or `failed`; files of a failed run are partial.
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub outputs: Vec<OutputRecord>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Output directory owned by a single run.
pub struct RunDir {
    root: PathBuf,
    outputs: Vec<OutputRecord>,
    started: Instant,
}

impl RunDir {
    pub fn create(root: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(Self { root: root.to_path_buf(), outputs: Vec::new(), started: Instant::now() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, contents: &str) -> CliResult<()> {
        let path = self.root.join(name);
        std::fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        self.outputs.retain(|o| o.file != name);
        self.outputs.push(OutputRecord { file: name.to_string(), sha256: sha256_hex(contents.as_bytes()), bytes: contents.len() });
        Ok(())
    }

    /// Write the manifest; `outcome` decides its status line.
    pub fn finish(self, command: &str, config: &RunConfig, outcome: &CliResult<()>) -> CliResult<RunManifest> {
        let echo = config.to_toml()?;
        let (status, error) = match outcome {
            Ok(()) => ("ok", None),
            Err(e @ CliError::Check(_)) => ("check-failed", Some(e.to_string())),
            Err(e) => ("failed", Some(e.to_string())),
        };
        let manifest = RunManifest {
            command: command.to_string(),
            toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: config.seed,
            config_sha256: sha256_hex(echo.as_bytes()),
            config: echo,
            wall_clock_s: self.started.elapsed().as_secs_f64(),
            status: status.to_string(),
            error,
            outputs: self.outputs,
        };
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Config(format!("manifest: {e}")))?;
        let path = self.root.join(MANIFEST_FILE);
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok(manifest)
    }
}
