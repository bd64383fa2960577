//! Run manifests: what produced an output directory, from which inputs.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{write_json, CliError, SCHEMA_VERSION};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

impl FileDigest {
    pub fn of(path: &Path) -> Result<Self, CliError> {
        let data = std::fs::read(path).map_err(|e| CliError::input(path, e))?;
        Ok(Self {
            path: path.display().to_string(),
            sha256: sha256_hex(&data),
            bytes: data.len() as u64,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timestamps {
    pub started_unix: u64,
    pub finished_unix: u64,
    /// `source_date_epoch` when pinned by that variable, else `clock`.
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub run_id: String,
    pub tool: String,
    pub tool_version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub config_digest: String,
    pub inputs: Vec<FileDigest>,
    pub seeds: Vec<u64>,
    pub timestamps: Timestamps,
    /// Files written next to this manifest, by name.
    pub outputs: Vec<FileDigest>,
}

pub fn sha256_hex(data: &[u8]) -> String {
    hex::encode(Sha256::digest(data))
}

fn now() -> (u64, &'static str) {
    match std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.trim().parse().ok())
    {
        Some(t) => (t, "source_date_epoch"),
        None => (
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
            "clock",
        ),
    }
}

/// Collects a run's identity before outputs are written.
pub struct ManifestBuilder {
    manifest: RunManifest,
}

impl ManifestBuilder {
    pub fn new(
        command: &str,
        config: serde_json::Value,
        inputs: &[PathBuf],
        seeds: Vec<u64>,
    ) -> Result<Self, CliError> {
        let canonical = serde_json::to_vec(&config).expect("config serializes");
        let config_digest = sha256_hex(&canonical);
        let inputs = inputs
            .iter()
            .map(|p| FileDigest::of(p))
            .collect::<Result<Vec<_>, _>>()?;
        let mut id = Sha256::new();
        id.update(command.as_bytes());
        id.update(config_digest.as_bytes());
        for input in &inputs {
            id.update(input.sha256.as_bytes());
        }
        for seed in &seeds {
            id.update(seed.to_le_bytes());
        }
        let run_id = hex::encode(id.finalize())[..16].to_string();
        let (started, source) = now();
        Ok(Self {
            manifest: RunManifest {
                schema_version: SCHEMA_VERSION,
                run_id,
                tool: "homevenue".into(),
                tool_version: env!("CARGO_PKG_VERSION").into(),
                command: command.into(),
                config,
                config_digest,
                inputs,
                seeds,
                timestamps: Timestamps {
                    started_unix: started,
                    finished_unix: started,
                    source: source.into(),
                },
                outputs: Vec::new(),
            },
        })
    }

    /// Derived from configuration, inputs and seeds only, so reruns agree.
    pub fn run_id(&self) -> &str {
        &self.manifest.run_id
    }

    /// Digests the named output files in `dir` and writes the manifest there.
    pub fn finish(mut self, dir: &Path, outputs: &[&str]) -> Result<RunManifest, CliError> {
        for name in outputs {
            let mut digest = FileDigest::of(&dir.join(name))?;
            digest.path = (*name).to_string();
            self.manifest.outputs.push(digest);
        }
        self.manifest.timestamps.finished_unix = now().0;
        write_json(&dir.join(MANIFEST_FILE), &self.manifest)?;
        Ok(self.manifest)
    }
}
