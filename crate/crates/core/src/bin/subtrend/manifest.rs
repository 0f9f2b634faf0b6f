use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use subtrend::{Error, Result};

use crate::commands::Run;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: PathBuf,
    pub sha256: String,
}

/// What is needed to reproduce a run: the arguments, the resolved
/// configuration, input checksums and a checksum of the report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Arguments after the program name, verbatim.
    pub args: Vec<String>,
    pub config: Value,
    pub seed: Option<u64>,
    pub inputs: Vec<InputDigest>,
    pub report_sha256: String,
    pub started_at: String,
    pub finished_at: String,
}

impl RunManifest {
    pub fn new(
        args: Vec<String>,
        run: &Run,
        started: DateTime<Utc>,
        finished: DateTime<Utc>,
    ) -> Self {
        let stamp = |t: DateTime<Utc>| t.to_rfc3339_opts(SecondsFormat::Millis, true);
        RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: run.command.to_string(),
            args,
            config: run.config.clone(),
            seed: run.seed,
            inputs: run.inputs.clone(),
            report_sha256: sha256_hex(&run.report),
            started_at: stamp(started),
            finished_at: stamp(finished),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(self)?;
        bytes.push(b'\n');
        fs::write(path, bytes)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path)?;
        let manifest: RunManifest = serde_json::from_slice(&bytes)?;
        if manifest.tool != env!("CARGO_PKG_NAME") {
            return Err(Error::Malformed(format!(
                "manifest was written by `{}`",
                manifest.tool
            )));
        }
        if manifest.version != env!("CARGO_PKG_VERSION") {
            eprintln!(
                "warning: manifest from version {}, running {}",
                manifest.version,
                env!("CARGO_PKG_VERSION")
            );
        }
        Ok(manifest)
    }

    /// Fails if any recorded input is missing or has changed.
    pub fn check_inputs(&self) -> Result<()> {
        for input in &self.inputs {
            let now = sha256_hex(&fs::read(&input.path)?);
            if now != input.sha256 {
                return Err(Error::InvalidConfig(format!(
                    "input {} changed since the manifest was written",
                    input.path.display()
                )));
            }
        }
        Ok(())
    }
}
