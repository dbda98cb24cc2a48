//! Error-to-exit-code policy.
//!
//! * `2` — the invocation itself is wrong. All flag-value validation lives in
//!   the clap parsers (see `args`), so exit 2 is produced by clap alone.
//! * `3` — the inputs name an infeasible or inconsistent problem: invalid
//!   scenario content, a pool evaluated against the wrong scenario, undefined
//!   metrics.
//! * `1` — files could not be read, written, or parsed.
//!
//! Oracle-limit fallbacks are warnings, not errors: commands report them on
//! stderr and still exit 0.

use std::fmt;
use std::path::Path;

#[derive(Debug)]
pub enum CliError {
    /// Semantically invalid problem inputs.
    Infeasible(String),
    /// I/O or file-format failure.
    Io(String),
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Infeasible(_) => 3,
            CliError::Io(_) => 1,
        }
    }

    /// Wraps a filesystem error with the action and path that failed.
    pub fn io(action: &str, path: &Path, source: std::io::Error) -> CliError {
        CliError::Io(format!("cannot {action} {}: {source}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Infeasible(msg) | CliError::Io(msg) => f.write_str(msg),
        }
    }
}

impl From<coaplan_core::Error> for CliError {
    fn from(e: coaplan_core::Error) -> Self {
        match e {
            coaplan_core::Error::Io { .. } | coaplan_core::Error::Parse { .. } => {
                CliError::Io(e.to_string())
            }
            other => CliError::Infeasible(other.to_string()),
        }
    }
}
