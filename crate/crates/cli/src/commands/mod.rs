pub mod allocate;
pub mod evaluate;
pub mod gen_scenario;
pub mod perturb;
pub mod report;

use std::fs;
use std::path::{Path, PathBuf};

use coaplan_core::OracleFallback;

use crate::error::{CliError, Result};

/// Global flags shared by every subcommand.
pub struct Global {
    pub seed: u64,
    pub out_dir: PathBuf,
}

pub fn ensure_out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io("create directory", dir, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::io("write", path, e))
}

pub fn path_str(path: &Path) -> String {
    path.display().to_string()
}

/// Oracle-limit fallbacks are warnings, not failures: the affected agents
/// were sequenced greedily and the command still exits 0.
pub fn warn_fallbacks(fallbacks: &[OracleFallback]) {
    for f in fallbacks {
        eprintln!(
            "warning: COA {} agent {} has {} tasks, above the exact oracle's limit of {}; \
             sequenced greedily instead",
            f.coa_id, f.agent_id, f.assigned, f.limit
        );
    }
}
