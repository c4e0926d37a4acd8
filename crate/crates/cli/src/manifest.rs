use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const FILE_NAME: &str = "manifest.json";

/// Record of one invocation. Everything except `wall_time_ms` is a pure
/// function of the arguments and input bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    /// SHA-256 of the canonical JSON of the resolved settings.
    pub config_hash: String,
    pub config: serde_json::Value,
    /// Input path to SHA-256 of its bytes.
    pub inputs: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub version: String,
    pub argv: Vec<String>,
    pub wall_time_ms: u64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn digest_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("{}: cannot read", path.display()))?;
    Ok(sha256_hex(&bytes))
}

pub struct ManifestBuilder {
    subcommand: String,
    config: serde_json::Value,
    inputs: BTreeMap<String, String>,
    seed: Option<u64>,
    argv: Vec<String>,
}

impl ManifestBuilder {
    pub fn new(subcommand: &str, config: serde_json::Value, seed: Option<u64>, argv: Vec<String>) -> Self {
        ManifestBuilder {
            subcommand: subcommand.to_string(),
            config,
            inputs: BTreeMap::new(),
            seed,
            argv,
        }
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        let digest = digest_file(path)?;
        self.inputs.insert(path.display().to_string(), digest);
        Ok(())
    }

    pub fn finish(self, wall_time_ms: u64) -> Result<RunManifest> {
        // serde_json maps are ordered, so this serialization is canonical.
        let canonical = serde_json::to_vec(&self.config)?;
        Ok(RunManifest {
            subcommand: self.subcommand,
            config_hash: sha256_hex(&canonical),
            config: self.config,
            inputs: self.inputs,
            seed: self.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            argv: self.argv,
            wall_time_ms,
        })
    }
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(FILE_NAME);
        std::fs::write(&path, serde_json::to_string_pretty(self)? + "\n")
            .with_context(|| format!("{}: cannot write", path.display()))?;
        Ok(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("{}: cannot read", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("{}: not a run manifest", path.display()))
    }

    /// Inputs whose current bytes differ from the recorded digest.
    pub fn changed_inputs(&self) -> Vec<String> {
        self.inputs
            .iter()
            .filter(|(p, d)| digest_file(Path::new(p)).map_or(true, |now| &now != *d))
            .map(|(p, _)| p.clone())
            .collect()
    }
}
