//! Robustness analysis: perturbs the task graph with travel-time noise or
//! edge removal, re-evaluates a pool, and reports quartile transitions and
//! valid-COA counts.
//!
//! Edge selection is stratified: task-pair edges and depot-to-task legs are
//! sampled separately, each at the requested percentage of its own stratum.
//! The affected-count arithmetic on the complete task graph (`C(n_task, 2)`
//! pairs, round-half-up) therefore holds exactly, while depot legs remain
//! perturbable so a first move can be invalidated too. For a fixed seed the
//! selection at a lower percentage is a subset of the selection at a higher
//! one, which makes per-seed sweep curves monotone by construction.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

use crate::allocation::CoaPool;
use crate::coa::{assemble_pool, rank_lexicographic, Coa, OracleFallback, RankedPool};
use crate::error::{Error, Result};
use crate::scenario::{GraphNode, NominalTravel, Scenario, TravelModel};
use crate::seed::{indexed_seed, labeled_seed};
use crate::sequencing::PolicyKind;

/// An undirected edge of the mission graph.
///
/// Task pairs are stored with the lower id first; depot legs pair a depot
/// node with a task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Edge {
    /// Unordered task pair `(i, j)` with `i < j`.
    Tasks(usize, usize),
    /// `(depot node, task)`.
    Depot(usize, usize),
}

impl Edge {
    /// Canonical task-pair edge; `a` and `b` must differ.
    pub fn tasks(a: usize, b: usize) -> Edge {
        debug_assert_ne!(a, b, "a task has no edge to itself");
        Edge::Tasks(a.min(b), a.max(b))
    }
}

/// The edge traversed by moving from `from` to task `to`, if any.
fn leg_edge(from: GraphNode, to: usize) -> Option<Edge> {
    match from {
        GraphNode::Task(i) if i == to => None,
        GraphNode::Task(i) => Some(Edge::tasks(i, to)),
        GraphNode::Depot(d) => Some(Edge::Depot(d, to)),
    }
}

/// What a perturbation did to the graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PerturbationKind {
    NoiseInflation { lambda_percent: f64 },
    Removal { removal_percent: f64 },
}

/// A seeded, reproducible edge selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgePerturbation {
    pub kind: PerturbationKind,
    /// Selected edges in canonical order.
    pub affected: Vec<Edge>,
    /// How many of `affected` are task-pair edges; equals
    /// round-half-up(percent x C(n_task, 2) / 100).
    pub task_pair_count: usize,
    /// How many of `affected` are depot legs; equals
    /// round-half-up(percent x n_depots x n_task / 100).
    pub depot_leg_count: usize,
    pub seed: u64,
}

impl EdgePerturbation {
    pub fn edge_set(&self) -> HashSet<Edge> {
        self.affected.iter().copied().collect()
    }
}

fn round_half_up_count(percent: f64, total: usize) -> usize {
    (percent * total as f64 / 100.0).round() as usize
}

fn validated_percent(name: &str, percent: f64) -> Result<()> {
    if !(0.0..=100.0).contains(&percent) {
        return Err(Error::InvalidConfig(format!(
            "{name} must lie in [0, 100], got {percent}"
        )));
    }
    Ok(())
}

/// Draws the stratified edge selection for `percent`. The permutation of each
/// stratum depends only on `seed`, so selections nest as `percent` grows.
fn sample_edges(scenario: &Scenario, percent: f64, seed: u64) -> (Vec<Edge>, usize, usize) {
    let n = scenario.n_tasks();
    let mut task_pairs: Vec<Edge> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| Edge::Tasks(i, j)))
        .collect();
    let mut depot_legs: Vec<Edge> = (0..scenario.n_depots())
        .flat_map(|d| (0..n).map(move |t| Edge::Depot(d, t)))
        .collect();
    let k_tasks = round_half_up_count(percent, task_pairs.len());
    let k_depots = round_half_up_count(percent, depot_legs.len());
    task_pairs.shuffle(&mut ChaCha8Rng::seed_from_u64(labeled_seed(
        seed,
        "edges-task",
    )));
    depot_legs.shuffle(&mut ChaCha8Rng::seed_from_u64(labeled_seed(
        seed,
        "edges-depot",
    )));
    let mut affected: Vec<Edge> = task_pairs[..k_tasks]
        .iter()
        .chain(&depot_legs[..k_depots])
        .copied()
        .collect();
    affected.sort_unstable();
    (affected, k_tasks, k_depots)
}

/// Travel-time source with a fixed set of inflated edges.
#[derive(Debug, Clone)]
pub struct InflatedTravel {
    factor: f64,
    affected: HashSet<Edge>,
}

impl InflatedTravel {
    pub fn factor(&self) -> f64 {
        self.factor
    }
}

impl TravelModel for InflatedTravel {
    fn travel_time(
        &self,
        scenario: &Scenario,
        agent_id: usize,
        from: GraphNode,
        to_task: usize,
    ) -> f64 {
        let base = NominalTravel.travel_time(scenario, agent_id, from, to_task);
        match leg_edge(from, to_task) {
            Some(edge) if self.affected.contains(&edge) => base * self.factor,
            _ => base,
        }
    }
}

/// Selects `lambda_percent` of the edges (per stratum) and inflates their
/// travel times by the same percentage: selected legs take
/// `1 + lambda_percent/100` times as long. Deterministic under `seed`.
pub fn perturb_noise(
    scenario: &Scenario,
    lambda_percent: f64,
    seed: u64,
) -> Result<(InflatedTravel, EdgePerturbation)> {
    validated_percent("lambda_percent", lambda_percent)?;
    let (affected, task_pair_count, depot_leg_count) = sample_edges(scenario, lambda_percent, seed);
    let perturbation = EdgePerturbation {
        kind: PerturbationKind::NoiseInflation { lambda_percent },
        task_pair_count,
        depot_leg_count,
        seed,
        affected,
    };
    let travel = InflatedTravel {
        factor: 1.0 + lambda_percent / 100.0,
        affected: perturbation.edge_set(),
    };
    Ok((travel, perturbation))
}

/// Selects `removal_percent` of the edges (per stratum) for removal.
/// Deterministic under `seed`; for a fixed seed, selections nest as the
/// percentage grows.
pub fn remove_edges(
    scenario: &Scenario,
    removal_percent: f64,
    seed: u64,
) -> Result<EdgePerturbation> {
    validated_percent("removal_percent", removal_percent)?;
    let (affected, task_pair_count, depot_leg_count) =
        sample_edges(scenario, removal_percent, seed);
    Ok(EdgePerturbation {
        kind: PerturbationKind::Removal { removal_percent },
        task_pair_count,
        depot_leg_count,
        seed,
        affected,
    })
}

/// Every edge a COA's planned trajectories traverse.
pub fn coa_edges(coa: &Coa, scenario: &Scenario) -> HashSet<Edge> {
    let mut edges = HashSet::new();
    for (agent_id, trajectory) in coa.trajectories.iter().enumerate() {
        let mut position = GraphNode::Depot(scenario.depot_node(agent_id));
        for entry in &trajectory.entries {
            edges.extend(leg_edge(position, entry.task_id));
            position = GraphNode::Task(entry.task_id);
        }
    }
    edges
}

/// A COA stays valid only if none of its planned legs crosses a removed edge.
pub fn coa_is_valid(coa: &Coa, scenario: &Scenario, removed: &HashSet<Edge>) -> bool {
    for (agent_id, trajectory) in coa.trajectories.iter().enumerate() {
        let mut position = GraphNode::Depot(scenario.depot_node(agent_id));
        for entry in &trajectory.entries {
            if let Some(edge) = leg_edge(position, entry.task_id) {
                if removed.contains(&edge) {
                    return false;
                }
            }
            position = GraphNode::Task(entry.task_id);
        }
    }
    true
}

/// Number of COAs whose planned trajectories avoid every removed edge.
/// Judged on the pre-computed trajectories — no re-planning.
pub fn count_valid(coas: &[Coa], scenario: &Scenario, removed: &HashSet<Edge>) -> usize {
    coas.iter()
        .filter(|c| coa_is_valid(c, scenario, removed))
        .count()
}

/// Row-stochastic 4x4 matrix of quartile movements. `probs[i][j]` is the
/// probability that a COA in quartile label `i + 1` before the perturbation
/// lands in quartile label `j + 1` after it (label 4 = top block). Rows whose
/// quartile held no COA are all zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionMatrix {
    probs: [[f64; 4]; 4],
}

impl TransitionMatrix {
    /// Counts quartile-before to quartile-after moves per COA id and
    /// normalizes each row. Both rankings must cover the same COA ids.
    pub fn from_rankings(before: &RankedPool, after: &RankedPool) -> Result<Self> {
        if before.len() != after.len() {
            return Err(Error::DimensionMismatch(format!(
                "rankings cover {} vs {} COAs",
                before.len(),
                after.len()
            )));
        }
        let mut counts = [[0usize; 4]; 4];
        for entry in before.entries() {
            let qa = after.quartile_of(entry.coa_id).ok_or_else(|| {
                Error::PoolMismatch(format!(
                    "COA {} is ranked before the perturbation but not after",
                    entry.coa_id
                ))
            })?;
            counts[(entry.quartile - 1) as usize][(qa - 1) as usize] += 1;
        }
        let mut probs = [[0.0; 4]; 4];
        for (row, count_row) in counts.iter().enumerate() {
            let total: usize = count_row.iter().sum();
            if total > 0 {
                for (col, &c) in count_row.iter().enumerate() {
                    probs[row][col] = c as f64 / total as f64;
                }
            }
        }
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[[f64; 4]; 4] {
        &self.probs
    }

    pub fn row_sums(&self) -> [f64; 4] {
        let mut sums = [0.0; 4];
        for (row, sum) in self.probs.iter().zip(&mut sums) {
            *sum = row.iter().sum();
        }
        sums
    }

    /// True when every occupied quartile keeps all its COAs.
    pub fn is_identity(&self, tolerance: f64) -> bool {
        self.probs.iter().enumerate().all(|(i, row)| {
            let occupied = row.iter().any(|&p| p != 0.0);
            !occupied
                || row
                    .iter()
                    .enumerate()
                    .all(|(j, &p)| (p - if i == j { 1.0 } else { 0.0 }).abs() <= tolerance)
        })
    }

    /// Entrywise mean of several matrices.
    pub fn mean(matrices: &[TransitionMatrix]) -> Option<TransitionMatrix> {
        if matrices.is_empty() {
            return None;
        }
        let mut probs = [[0.0; 4]; 4];
        for m in matrices {
            for (acc_row, row) in probs.iter_mut().zip(&m.probs) {
                for (acc, &p) in acc_row.iter_mut().zip(row) {
                    *acc += p;
                }
            }
        }
        for row in &mut probs {
            for p in row {
                *p /= matrices.len() as f64;
            }
        }
        Some(TransitionMatrix { probs })
    }
}

/// One noise level of a [`rerank_under_noise`] run.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseRerank {
    pub lambda_percent: f64,
    pub perturbation: EdgePerturbation,
    pub ranked: RankedPool,
    pub transition: TransitionMatrix,
}

/// Baseline ranking plus one rerank per requested noise level.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseAnalysis {
    pub baseline: RankedPool,
    pub levels: Vec<NoiseRerank>,
    /// Oracle fallbacks hit while assembling the baseline; the perturbed
    /// assemblies share policy, assignments, and seed, so they fall back on
    /// exactly the same (COA, agent) pairs.
    pub fallbacks: Vec<OracleFallback>,
}

impl NoiseAnalysis {
    /// CSV of all transition matrices, one row per (level, cell).
    pub fn transitions_csv(&self) -> String {
        let rows: Vec<(f64, TransitionMatrix)> = self
            .levels
            .iter()
            .map(|l| (l.lambda_percent, l.transition))
            .collect();
        transition_matrices_csv(&rows)
    }
}

/// Assembles and ranks the pool unperturbed, then once per noise level with
/// inflated travel times, tracking quartile transitions against the baseline.
///
/// Sequencing runs with the same policy, assignments, and sequencing seed at
/// every level — only the travel model changes — so transitions isolate the
/// effect of the noise. The edge selection at level index `i` draws from a
/// sub-seed of `seed`.
pub fn rerank_under_noise(
    pool: &CoaPool,
    scenario: &Scenario,
    lambda_levels: &[f64],
    policy: PolicyKind,
    seed: u64,
    oracle_limit: usize,
) -> Result<NoiseAnalysis> {
    let base = assemble_pool(pool, scenario, policy, &NominalTravel, seed, oracle_limit)?;
    let baseline = rank_lexicographic(&base.coas)?;
    let noise_seed = labeled_seed(seed, "noise");
    let levels = lambda_levels
        .iter()
        .enumerate()
        .map(|(idx, &lambda)| {
            let (travel, perturbation) =
                perturb_noise(scenario, lambda, indexed_seed(noise_seed, idx as u64, 0))?;
            let assembled = assemble_pool(pool, scenario, policy, &travel, seed, oracle_limit)?;
            let ranked = rank_lexicographic(&assembled.coas)?;
            let transition = TransitionMatrix::from_rankings(&baseline, &ranked)?;
            Ok(NoiseRerank {
                lambda_percent: lambda,
                perturbation,
                ranked,
                transition,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NoiseAnalysis {
        baseline,
        levels,
        fallbacks: base.fallbacks,
    })
}

/// One point of a removal sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RemovalPoint {
    pub removal_percent: f64,
    pub seed: u64,
    pub n_valid: usize,
}

/// Counts valid COAs at every (seed, percent) combination. Per seed, the
/// removed sets nest as the percentage grows, so each seed's curve is
/// non-increasing by construction.
pub fn removal_sweep(
    coas: &[Coa],
    scenario: &Scenario,
    percents: &[f64],
    seeds: &[u64],
) -> Result<Vec<RemovalPoint>> {
    let mut points = Vec::with_capacity(percents.len() * seeds.len());
    for &seed in seeds {
        for &removal_percent in percents {
            let removed = remove_edges(scenario, removal_percent, seed)?;
            points.push(RemovalPoint {
                removal_percent,
                seed,
                n_valid: count_valid(coas, scenario, &removed.edge_set()),
            });
        }
    }
    Ok(points)
}

/// CSV with columns `removal_percent,n_valid,seed`.
pub fn removal_points_csv(points: &[RemovalPoint]) -> String {
    let mut out = String::from("removal_percent,n_valid,seed\n");
    for p in points {
        out.push_str(&format!("{},{},{}\n", p.removal_percent, p.n_valid, p.seed));
    }
    out
}

/// CSV with one 4x4 block per matrix: four rows per `lambda_percent`, one per
/// from-quartile, with the four to-quartile probabilities as columns.
pub fn transition_matrices_csv(rows: &[(f64, TransitionMatrix)]) -> String {
    let mut out = String::from("lambda_percent,from_quartile,to_q1,to_q2,to_q3,to_q4\n");
    for (lambda, matrix) in rows {
        for (i, row) in matrix.probs().iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                lambda,
                i + 1,
                row[0],
                row[1],
                row[2],
                row[3]
            ));
        }
    }
    out
}
