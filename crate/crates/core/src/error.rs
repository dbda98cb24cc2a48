use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A scenario violates a structural invariant (dimensions, ranges,
    /// joint feasibility of the load cap).
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    /// A configuration value is out of range before any work starts.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Two objects that must agree on (n_agents, n_tasks) do not.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Pool-level diversity is undefined for fewer than two COAs.
    #[error("pool must hold at least 2 COAs, got {0}")]
    PoolTooSmall(usize),

    /// A pool file does not belong to the scenario it is evaluated against.
    #[error("pool/scenario mismatch: {0}")]
    PoolMismatch(String),

    /// A policy asked the simulator to execute a masked task.
    #[error("task {task} is masked at clock {clock}")]
    MaskedTask { task: usize, clock: f64 },

    /// The exact sequencer refuses assignments above its subset-DP limit.
    #[error("oracle limit exceeded: {assigned} tasks assigned to agent {agent}, limit {limit}")]
    OracleLimit {
        agent: usize,
        assigned: usize,
        limit: usize,
    },

    /// No usable entries were left after skipping zero-valued oracle counts.
    #[error("MAPE undefined: all {0} oracle entries are zero")]
    MapeUndefined(usize),

    #[error("failed to {action} {path}: {source}")]
    Io {
        action: &'static str,
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("parse error in {path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
}
