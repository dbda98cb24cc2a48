//! Planning library for pools of diverse multi-agent courses of action (COAs).
//!
//! A COA assigns every task to exactly one agent and fixes the order in which
//! each agent executes its share against per-task deadlines. This crate builds
//! a *pool* of such plans rather than a single one, so that an operator holds
//! several genuinely different alternatives when conditions change:
//!
//! * [`scenario`] — the world model: tasks, agents, the agent-task
//!   compatibility matrix, travel kinematics, sampling, and JSON file I/O.
//! * [`allocation`] — condensed COAs (pure task-to-agent assignments) and an
//!   elitist genetic algorithm that maximizes pool diversity (minimum spanning
//!   tree weight over pairwise assignment distances) plus summed compatibility.
//! * [`sequencing`] — a per-agent discrete-event simulator with feasibility
//!   masking, and three interchangeable sequencing policies: random walk,
//!   min-slack greedy, and an exact subset-DP oracle that maximizes the number
//!   of tasks completed before their deadlines.
//! * [`coa`] — assembles full COAs from an allocation pool plus a policy,
//!   computes per-COA metrics, and ranks the pool lexicographically.
//! * [`robustness`] — travel-time noise and edge-removal perturbations, rank
//!   quartile transition matrices, and valid-COA counting.
//!
//! Every operation that consumes randomness is driven by explicit 64-bit
//! seeds; equal seeds give bit-identical results, including under internal
//! parallelism.

pub mod allocation;
pub mod coa;
pub mod error;
pub mod robustness;
pub mod scenario;
pub mod seed;
pub mod sequencing;

pub use allocation::{
    compatibility_score, diversity, fitness, load_pool, pairwise_distance, repair, run_ga,
    save_pool, CoaPool, CondensedCoa, FitnessHistory, GaConfig, GaOutcome, GenerationStats,
    PoolRecord,
};
pub use coa::{
    assemble_pool, pool_report_csv, rank_lexicographic, total_time, AssembledPool, Coa,
    OracleFallback, RankedCoa, RankedPool,
};
pub use error::{Error, Result};
pub use robustness::{
    coa_edges, coa_is_valid, count_valid, perturb_noise, removal_points_csv, removal_sweep,
    remove_edges, rerank_under_noise, transition_matrices_csv, Edge, EdgePerturbation,
    InflatedTravel, NoiseAnalysis, NoiseRerank, PerturbationKind, RemovalPoint, TransitionMatrix,
};
pub use scenario::{
    auto_t_max, completion_time, load_scenario, resample_deadlines, sample_scenario, save_scenario,
    scenario_from_json, scenario_to_json, travel_time, Agent, CompatibilityMatrix, GraphNode,
    NominalTravel, SampleConfig, Scenario, Task, TravelModel, DEFAULT_C_MIN,
};
pub use sequencing::{
    mape, reward, run_policy, sequence_exact, sequence_greedy, sequence_random, MapeResult,
    PolicyKind, SequencerSim, StepOutcome, TaskFeatures, TaskGraphState, Trajectory,
    TrajectoryEntry, DEFAULT_ORACLE_LIMIT,
};
