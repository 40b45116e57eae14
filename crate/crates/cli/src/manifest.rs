use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::table::write_json;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Provenance written next to every output set.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool_version: &'static str,
    pub subcommand: String,
    pub resolved_config: serde_json::Value,
    pub master_seed: u64,
    /// SHA-256 of each input file, keyed by the path as given.
    pub input_digests: BTreeMap<String, String>,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(subcommand: &str, config: &impl Serialize, master_seed: u64) -> Result<Self> {
        Ok(RunManifest {
            tool_version: env!("CARGO_PKG_VERSION"),
            subcommand: subcommand.to_string(),
            resolved_config: serde_json::to_value(config)?,
            master_seed,
            input_digests: BTreeMap::new(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        })
    }

    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
        let digest = hex::encode(Sha256::digest(&bytes));
        self.input_digests
            .insert(path.display().to_string(), digest);
        Ok(())
    }

    pub fn write(&self, out: &Path) -> Result<PathBuf> {
        let path = out.join(MANIFEST_FILE);
        write_json(&path, self)?;
        Ok(path)
    }
}
