//! Full-COA assembly and ranking: runs sequencing for every (COA, agent)
//! pair of a pool, aggregates per-COA metrics, and ranks the pool
//! lexicographically.
//!
//! Assembly fans the independent sequencing jobs out in parallel; every job
//! draws its randomness from a seed split per (COA, agent), so results do not
//! depend on scheduling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

use crate::allocation::CoaPool;
use crate::error::{Error, Result};
use crate::scenario::{Scenario, TravelModel};
use crate::seed::{indexed_seed, labeled_seed};
use crate::sequencing::{
    run_policy, sequence_exact, sequence_greedy, PolicyKind, SequencerSim, Trajectory,
};

/// A fully sequenced course of action: one trajectory per agent plus the
/// aggregate metrics the ranking criteria use.
#[derive(Debug, Clone, PartialEq)]
pub struct Coa {
    /// Index of the condensed COA within its pool.
    pub coa_id: usize,
    /// One trajectory per agent, indexed by agent id.
    pub trajectories: Vec<Trajectory>,
    pub total_completed: usize,
    /// `total_completed / n_task`, in [0, 1].
    pub completion_rate: f64,
    /// Makespan: the latest agent finish clock.
    pub total_time: f64,
    /// This COA's slice of the pool compatibility score:
    /// `sum_j C[assignment[j], j]`.
    pub total_compatibility: f64,
}

/// Notice that one agent's assignment exceeded the exact oracle's limit and
/// was sequenced greedily instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleFallback {
    pub coa_id: usize,
    pub agent_id: usize,
    pub assigned: usize,
    pub limit: usize,
}

/// Output of [`assemble_pool`]: the sequenced COAs plus any oracle fallbacks.
#[derive(Debug, Clone, PartialEq)]
pub struct AssembledPool {
    pub coas: Vec<Coa>,
    pub policy: PolicyKind,
    /// Empty unless the exact policy fell back to greedy somewhere.
    pub fallbacks: Vec<OracleFallback>,
}

/// Makespan over a COA's trajectories: the latest final clock, 0 when no
/// agent moved. Isolated so a summed-time convention stays a one-line change.
pub fn total_time(trajectories: &[Trajectory]) -> f64 {
    trajectories
        .iter()
        .map(|t| t.final_clock)
        .fold(0.0, f64::max)
}

/// Sequences every (COA, agent) pair of `pool` with `policy` and aggregates
/// per-COA metrics.
///
/// Jobs run in parallel and are seeded per (COA, agent), so the result is a
/// pure function of the inputs. When the exact policy meets an assignment
/// above `oracle_limit`, that agent falls back to the greedy sequencer and
/// the fallback is reported rather than treated as an error.
pub fn assemble_pool(
    pool: &CoaPool,
    scenario: &Scenario,
    policy: PolicyKind,
    travel: &dyn TravelModel,
    seed: u64,
    oracle_limit: usize,
) -> Result<AssembledPool> {
    pool.check_binding(scenario)?;
    let seq_seed = labeled_seed(seed, "sequence");
    let jobs: Vec<(usize, usize)> = (0..pool.n_coas())
        .flat_map(|k| (0..scenario.n_agents()).map(move |a| (k, a)))
        .collect();

    let runs: Vec<(usize, usize, Trajectory, Option<OracleFallback>)> = jobs
        .into_par_iter()
        .map(|(k, agent)| {
            let assigned = pool.coas()[k].tasks_of(agent);
            let sim = SequencerSim::new(scenario, agent, assigned.clone(), travel)?;
            let job_seed = indexed_seed(seq_seed, k as u64, agent as u64);
            let (trajectory, fallback) = match policy {
                PolicyKind::Exact => match sequence_exact(sim, oracle_limit) {
                    Ok(t) => (t, None),
                    Err(Error::OracleLimit {
                        assigned: size,
                        limit,
                        ..
                    }) => {
                        let retry = SequencerSim::new(scenario, agent, assigned, travel)?;
                        (
                            sequence_greedy(retry)?,
                            Some(OracleFallback {
                                coa_id: k,
                                agent_id: agent,
                                assigned: size,
                                limit,
                            }),
                        )
                    }
                    Err(other) => return Err(other),
                },
                _ => (run_policy(sim, policy, job_seed, oracle_limit)?, None),
            };
            Ok((k, agent, trajectory, fallback))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut trajectories: Vec<Vec<Option<Trajectory>>> =
        vec![vec![None; scenario.n_agents()]; pool.n_coas()];
    let mut fallbacks = Vec::new();
    for (k, agent, trajectory, fallback) in runs {
        trajectories[k][agent] = Some(trajectory);
        fallbacks.extend(fallback);
    }
    fallbacks.sort_by_key(|f| (f.coa_id, f.agent_id));

    let coas = trajectories
        .into_iter()
        .enumerate()
        .map(|(k, per_agent)| {
            let trajectories: Vec<Trajectory> = per_agent.into_iter().map(Option::unwrap).collect();
            let total_completed: usize = trajectories.iter().map(|t| t.completed_count).sum();
            let assignment = pool.coas()[k].assignment();
            let total_compatibility: f64 = assignment
                .iter()
                .enumerate()
                .map(|(j, &a)| scenario.compat().get(a, j))
                .sum();
            Coa {
                coa_id: k,
                total_completed,
                completion_rate: total_completed as f64 / scenario.n_tasks() as f64,
                total_time: total_time(&trajectories),
                total_compatibility,
                trajectories,
            }
        })
        .collect();

    Ok(AssembledPool {
        coas,
        policy,
        fallbacks,
    })
}

/// One COA's standing after ranking.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankedCoa {
    pub coa_id: usize,
    pub completed: usize,
    pub completion_rate: f64,
    pub total_time: f64,
    pub compatibility: f64,
    /// 1 = best.
    pub rank: usize,
    /// Quartile label in 1..=4 with 4 = top block.
    pub quartile: u8,
}

/// A pool sorted by rank (best first).
#[derive(Debug, Clone, PartialEq)]
pub struct RankedPool {
    entries: Vec<RankedCoa>,
}

impl RankedPool {
    /// Entries ordered by rank, best first.
    pub fn entries(&self) -> &[RankedCoa] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Quartile label of a pool member.
    pub fn quartile_of(&self, coa_id: usize) -> Option<u8> {
        self.entries
            .iter()
            .find(|e| e.coa_id == coa_id)
            .map(|e| e.quartile)
    }
}

/// Ranks COAs by completed count (more is better), then total time (less is
/// better), then compatibility (more is better), then COA id — a total,
/// deterministic order. Rank `r` of `n` maps to the block `ceil(4r / n)`,
/// relabeled so quartile 4 is the best block.
pub fn rank_lexicographic(coas: &[Coa]) -> Result<RankedPool> {
    if coas.is_empty() {
        return Err(Error::PoolTooSmall(0));
    }
    let mut order: Vec<&Coa> = coas.iter().collect();
    order.sort_by(|a, b| {
        b.total_completed
            .cmp(&a.total_completed)
            .then(
                a.total_time
                    .partial_cmp(&b.total_time)
                    .unwrap_or(Ordering::Equal),
            )
            .then(
                b.total_compatibility
                    .partial_cmp(&a.total_compatibility)
                    .unwrap_or(Ordering::Equal),
            )
            .then(a.coa_id.cmp(&b.coa_id))
    });
    let n = order.len();
    let entries = order
        .into_iter()
        .enumerate()
        .map(|(i, coa)| {
            let rank = i + 1;
            let block = (4 * rank).div_ceil(n);
            RankedCoa {
                coa_id: coa.coa_id,
                completed: coa.total_completed,
                completion_rate: coa.completion_rate,
                total_time: coa.total_time,
                compatibility: coa.total_compatibility,
                rank,
                quartile: (5 - block) as u8,
            }
        })
        .collect();
    Ok(RankedPool { entries })
}

/// CSV report, one row per COA in rank order.
pub fn pool_report_csv(ranked: &RankedPool, policy: PolicyKind) -> String {
    let mut out = String::from(
        "coa_id,completed,completion_rate,total_time,compatibility,rank,quartile,policy\n",
    );
    for e in ranked.entries() {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            e.coa_id,
            e.completed,
            e.completion_rate,
            e.total_time,
            e.compatibility,
            e.rank,
            e.quartile,
            policy
        ));
    }
    out
}
