//! Run manifests.
//!
//! Every artifact-producing invocation writes one manifest recording its
//! effective configuration, seeds, inputs, and outputs, so each output file
//! traces back to exactly one command and can be reproduced from it. The
//! manifest is the only output allowed to differ between re-runs (it carries
//! the wall-clock duration); all CSV and JSON artifacts are byte-identical
//! under equal flags and seed.

use serde::Serialize;
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use coaplan_core::seed::labeled_seed;

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL: &str = "coaplan";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// The four sub-streams every command derives from the master seed.
pub const SEED_LABELS: [&str; 4] = ["scenario", "ga", "policy", "perturb"];

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    /// Effective flag values, after defaulting and `auto` resolution.
    pub args: serde_json::Value,
    pub seed: u64,
    pub sub_seeds: BTreeMap<&'static str, u64>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub duration_seconds: f64,
}

pub fn sub_seeds(master: u64) -> BTreeMap<&'static str, u64> {
    SEED_LABELS
        .iter()
        .map(|label| (*label, labeled_seed(master, label)))
        .collect()
}

/// Writes `<out_dir>/<name>.<command>.manifest.json` and returns its path.
pub fn write(out_dir: &Path, name: &str, manifest: &RunManifest) -> Result<PathBuf> {
    let path = out_dir.join(format!("{name}.{}.manifest.json", manifest.command));
    let mut text = serde_json::to_string_pretty(manifest)
        .map_err(|e| CliError::Io(format!("cannot encode manifest: {e}")))?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| CliError::io("write", &path, e))?;
    Ok(path)
}
