//! Single-agent task sequencing as a discrete-event simulator with masking,
//! plus three interchangeable policies: a seeded random walk, a min-slack
//! greedy heuristic, and an exact oracle that maximizes completed tasks.
//!
//! The simulator advances only at decision instants (event-based): the clock
//! jumps by travel plus completion time, and expiries are detected lazily at
//! the next instant, which is observationally identical to a continuous
//! clock because nothing can be observed between events.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scenario::{completion_time, GraphNode, Scenario, TravelModel};

/// Largest assignment the exact oracle accepts by default. The subset DP
/// holds `2^n x n` states; 16 keeps that desk-scale (about 1M states).
pub const DEFAULT_ORACLE_LIMIT: usize = 16;

/// Step penalty driven by the cumulative expired count:
/// `-exp(0.1 * n_exp) + 1`.
///
/// Zero when nothing has expired, strictly decreasing as expiries accumulate.
pub fn reward(n_exp: usize) -> f64 {
    -(0.1 * n_exp as f64).exp() + 1.0
}

/// Observation row for one task: position, predicted arrival and completion
/// durations for the observing agent, and time remaining until the deadline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaskFeatures {
    pub x: f64,
    pub y: f64,
    /// Travel time from the agent's current position, seconds.
    pub arrival_time: f64,
    /// Completion time for the observing agent, seconds.
    pub completion_time: f64,
    /// `deadline - clock`, seconds; negative once the deadline has passed.
    pub time_to_deadline: f64,
}

impl TaskFeatures {
    pub fn as_array(&self) -> [f64; 5] {
        [
            self.x,
            self.y,
            self.arrival_time,
            self.completion_time,
            self.time_to_deadline,
        ]
    }
}

/// Full observation at a decision instant: one feature row per task in the
/// scenario plus the action mask.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskGraphState {
    pub features: Vec<TaskFeatures>,
    /// `mask[i]` is true iff task `i` is selectable now.
    pub mask: Vec<bool>,
    pub clock: f64,
    pub agent_position: (f64, f64),
}

impl TaskGraphState {
    /// Indices of selectable tasks, ascending.
    pub fn unmasked(&self) -> Vec<usize> {
        self.mask
            .iter()
            .enumerate()
            .filter(|&(_, &m)| m)
            .map(|(i, _)| i)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TaskStatus {
    Unassigned,
    Pending,
    Completed,
    /// Deadline passed before completion.
    Expired,
}

/// One agent working through its assigned task set against the clock.
pub struct SequencerSim<'a> {
    scenario: &'a Scenario,
    travel: &'a dyn TravelModel,
    agent_id: usize,
    /// Assigned task ids, ascending.
    assigned: Vec<usize>,
    status: Vec<TaskStatus>,
    clock: f64,
    position: GraphNode,
    entries: Vec<TrajectoryEntry>,
}

/// Execution record for one completed task.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryEntry {
    pub task_id: usize,
    /// Clock when the agent left its previous position.
    pub depart_time: f64,
    /// `depart_time` + travel.
    pub arrive_time: f64,
    /// `arrive_time` + completion; also the clock after the step.
    pub finish_time: f64,
}

/// Outcome of one policy run over one agent's assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// Completed tasks in execution order.
    pub entries: Vec<TrajectoryEntry>,
    /// Assigned tasks never executed (expired or unreachable), ascending.
    pub missed: Vec<usize>,
    pub completed_count: usize,
    /// Count of missed tasks; every assigned task is either completed or
    /// missed once the episode ends.
    pub expired_count: usize,
    /// Clock when the episode ended.
    pub final_clock: f64,
}

impl Trajectory {
    /// CSV with one row per assigned task: completed tasks in execution
    /// order, then missed tasks by ascending id with empty time fields.
    pub fn to_csv(&self, scenario: &Scenario) -> String {
        let mut out = String::from("task_id,depart_time,arrive_time,finish_time,deadline,status\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{},{},{},completed\n",
                e.task_id,
                e.depart_time,
                e.arrive_time,
                e.finish_time,
                scenario.tasks()[e.task_id].deadline
            ));
        }
        for &t in &self.missed {
            out.push_str(&format!(
                "{},,,,{},expired\n",
                t,
                scenario.tasks()[t].deadline
            ));
        }
        out
    }
}

/// Result of a [`SequencerSim::step`].
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    /// Penalty from the cumulative expired count after this step.
    pub reward: f64,
    pub state: TaskGraphState,
    /// True when every remaining task is masked.
    pub done: bool,
}

impl<'a> SequencerSim<'a> {
    pub fn new(
        scenario: &'a Scenario,
        agent_id: usize,
        assigned: Vec<usize>,
        travel: &'a dyn TravelModel,
    ) -> Result<Self> {
        if agent_id >= scenario.n_agents() {
            return Err(Error::InvalidConfig(format!(
                "agent {agent_id} out of range, scenario has {} agents",
                scenario.n_agents()
            )));
        }
        let mut status = vec![TaskStatus::Unassigned; scenario.n_tasks()];
        for &t in &assigned {
            if t >= scenario.n_tasks() {
                return Err(Error::InvalidConfig(format!(
                    "task {t} out of range, scenario has {} tasks",
                    scenario.n_tasks()
                )));
            }
            if status[t] == TaskStatus::Pending {
                return Err(Error::InvalidConfig(format!(
                    "task {t} assigned twice to agent {agent_id}"
                )));
            }
            status[t] = TaskStatus::Pending;
        }
        let mut assigned = assigned;
        assigned.sort_unstable();
        Ok(Self {
            scenario,
            travel,
            agent_id,
            assigned,
            status,
            clock: 0.0,
            position: GraphNode::Depot(scenario.depot_node(agent_id)),
            entries: Vec::new(),
        })
    }

    pub fn agent_id(&self) -> usize {
        self.agent_id
    }

    pub fn assigned(&self) -> &[usize] {
        &self.assigned
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn position(&self) -> GraphNode {
        self.position
    }

    pub fn scenario(&self) -> &Scenario {
        self.scenario
    }

    /// Observation at the current decision instant, mask included.
    pub fn build_state(&self) -> TaskGraphState {
        let features = self
            .scenario
            .tasks()
            .iter()
            .map(|t| TaskFeatures {
                x: t.x,
                y: t.y,
                arrival_time: self.travel.travel_time(
                    self.scenario,
                    self.agent_id,
                    self.position,
                    t.id,
                ),
                completion_time: completion_time(self.agent_id, t.id, self.scenario.compat()),
                time_to_deadline: t.deadline - self.clock,
            })
            .collect();
        let mut state = TaskGraphState {
            features,
            mask: Vec::new(),
            clock: self.clock,
            agent_position: self.scenario.node_position(self.position),
        };
        self.apply_mask(&mut state);
        state
    }

    /// Recomputes the mask from the feature rows. A task is masked (not
    /// selectable) when it (a) is not assigned to this agent, (b) is already
    /// completed, (c) has expired (`time_to_deadline <= 0`), or (d) cannot
    /// finish in time from here: `clock + arrival + completion > deadline`.
    /// Finishing exactly at the deadline counts as feasible.
    pub fn apply_mask(&self, state: &mut TaskGraphState) {
        state.mask = self
            .scenario
            .tasks()
            .iter()
            .map(|t| {
                let f = &state.features[t.id];
                self.status[t.id] == TaskStatus::Pending
                    && f.time_to_deadline > 0.0
                    && state.clock + f.arrival_time + f.completion_time <= t.deadline
            })
            .collect();
    }

    /// True when no task is selectable.
    pub fn is_done(&self) -> bool {
        !self.build_state().mask.contains(&true)
    }

    /// Executes one selectable task: travel there, complete it, advance the
    /// clock, then lazily mark any deadline that passed in the meantime.
    ///
    /// Choosing a masked task is a contract violation and returns an error;
    /// policies only ever see unmasked choices.
    pub fn step(&mut self, task_id: usize) -> Result<StepOutcome> {
        let pre = self.build_state();
        if task_id >= pre.mask.len() || !pre.mask[task_id] {
            return Err(Error::MaskedTask {
                task: task_id,
                clock: self.clock,
            });
        }
        let depart_time = self.clock;
        let arrive_time = depart_time + pre.features[task_id].arrival_time;
        let finish_time = arrive_time + pre.features[task_id].completion_time;
        self.clock = finish_time;
        self.position = GraphNode::Task(task_id);
        self.status[task_id] = TaskStatus::Completed;
        self.entries.push(TrajectoryEntry {
            task_id,
            depart_time,
            arrive_time,
            finish_time,
        });
        for &t in &self.assigned {
            if self.status[t] == TaskStatus::Pending
                && self.scenario.tasks()[t].deadline < self.clock
            {
                self.status[t] = TaskStatus::Expired;
            }
        }
        let expired = self
            .status
            .iter()
            .filter(|&&s| s == TaskStatus::Expired)
            .count();
        let state = self.build_state();
        let done = !state.mask.contains(&true);
        Ok(StepOutcome {
            reward: reward(expired),
            state,
            done,
        })
    }

    /// Closes the episode and returns its record. Every assigned task ends up
    /// either in `entries` (completed) or in `missed`.
    pub fn into_trajectory(self) -> Trajectory {
        let missed: Vec<usize> = self
            .assigned
            .iter()
            .copied()
            .filter(|&t| self.status[t] != TaskStatus::Completed)
            .collect();
        Trajectory {
            completed_count: self.entries.len(),
            expired_count: missed.len(),
            final_clock: self.clock,
            entries: self.entries,
            missed,
        }
    }
}

/// Picks uniformly among unmasked tasks until everything is masked.
pub fn sequence_random(mut sim: SequencerSim, rng: &mut impl Rng) -> Result<Trajectory> {
    loop {
        let open = sim.build_state().unmasked();
        if open.is_empty() {
            return Ok(sim.into_trajectory());
        }
        let pick = open[rng.random_range(0..open.len())];
        sim.step(pick)?;
    }
}

/// Always serves the most urgent selectable task: minimum slack
/// `deadline - (clock + arrival + completion)`, ties broken by smaller
/// arrival time, then by lower task id. Deterministic.
pub fn sequence_greedy(mut sim: SequencerSim) -> Result<Trajectory> {
    loop {
        let state = sim.build_state();
        let pick = state.unmasked().into_iter().min_by(|&a, &b| {
            let slack = |t: usize| {
                let f = &state.features[t];
                f.time_to_deadline - f.arrival_time - f.completion_time
            };
            slack(a)
                .partial_cmp(&slack(b))
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(
                    state.features[a]
                        .arrival_time
                        .partial_cmp(&state.features[b].arrival_time)
                        .unwrap_or(std::cmp::Ordering::Equal),
                )
                .then(a.cmp(&b))
        });
        match pick {
            Some(t) => {
                sim.step(t)?;
            }
            None => return Ok(sim.into_trajectory()),
        }
    }
}

/// Exact sequencer: maximizes the number of tasks completed by their
/// deadlines; among maxima, minimizes the final clock.
///
/// Dynamic program over (visited subset, last task) states storing the
/// earliest achievable finishing clock; transitions that would miss a
/// deadline are pruned. Assignments larger than `limit` are refused so the
/// state table stays bounded — callers fall back to the greedy policy.
pub fn sequence_exact(mut sim: SequencerSim, limit: usize) -> Result<Trajectory> {
    let order = exact_order(&sim, limit)?;
    for t in order {
        sim.step(t)?;
    }
    debug_assert!(sim.is_done(), "optimal order must exhaust the mask");
    Ok(sim.into_trajectory())
}

/// The optimal visit order for a fresh simulator, without executing it.
fn exact_order(sim: &SequencerSim, limit: usize) -> Result<Vec<usize>> {
    let tasks = sim.assigned();
    let n = tasks.len();
    if n > limit {
        return Err(Error::OracleLimit {
            agent: sim.agent_id(),
            assigned: n,
            limit,
        });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let scenario = sim.scenario();
    let agent = sim.agent_id();
    let comp: Vec<f64> = tasks
        .iter()
        .map(|&t| completion_time(agent, t, scenario.compat()))
        .collect();
    let deadline: Vec<f64> = tasks
        .iter()
        .map(|&t| scenario.tasks()[t].deadline)
        .collect();
    // travel[i][j]: from task i to task j; from_start[j]: from the sim's
    // current position. Matches the arithmetic order the simulator uses:
    // arrive = clock + travel, finish = arrive + comp.
    let travel: Vec<Vec<f64>> = tasks
        .iter()
        .map(|&from| {
            tasks
                .iter()
                .map(|&to| {
                    sim.travel
                        .travel_time(scenario, agent, GraphNode::Task(from), to)
                })
                .collect()
        })
        .collect();
    let from_start: Vec<f64> = tasks
        .iter()
        .map(|&to| sim.travel.travel_time(scenario, agent, sim.position(), to))
        .collect();

    let size = 1usize << n;
    const UNREACHED: f64 = f64::INFINITY;
    // finish[mask * n + last] = earliest clock completing exactly `mask`,
    // ending at `last`, with every member done by its deadline.
    let mut finish = vec![UNREACHED; size * n];
    let mut parent = vec![u8::MAX; size * n];
    for j in 0..n {
        let arrive = sim.clock() + from_start[j];
        let f = arrive + comp[j];
        if f <= deadline[j] {
            finish[(1 << j) * n + j] = f;
        }
    }
    for mask in 1..size {
        for last in 0..n {
            let clock = finish[mask * n + last];
            if clock == UNREACHED || mask & (1 << last) == 0 {
                continue;
            }
            for next in 0..n {
                if mask & (1 << next) != 0 {
                    continue;
                }
                let arrive = clock + travel[last][next];
                let f = arrive + comp[next];
                if f <= deadline[next] {
                    let slot = (mask | 1 << next) * n + next;
                    if f < finish[slot] {
                        finish[slot] = f;
                        parent[slot] = last as u8;
                    }
                }
            }
        }
    }

    // Best = most tasks, then earliest clock; scan order fixes remaining ties.
    let mut best: Option<(usize, f64, usize, usize)> = None; // (count, clock, mask, last)
    for mask in 1..size {
        let count = mask.count_ones() as usize;
        for last in 0..n {
            let clock = finish[mask * n + last];
            if clock == UNREACHED {
                continue;
            }
            let better = match best {
                None => true,
                Some((bc, bt, _, _)) => count > bc || (count == bc && clock < bt),
            };
            if better {
                best = Some((count, clock, mask, last));
            }
        }
    }
    let Some((count, _, mut mask, mut last)) = best else {
        return Ok(Vec::new()); // nothing is individually feasible
    };
    let mut order = vec![0usize; count];
    for slot in (0..count).rev() {
        order[slot] = tasks[last];
        let p = parent[mask * n + last];
        mask &= !(1 << last);
        last = p as usize;
    }
    Ok(order)
}

/// Policy selector for [`run_policy`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    Random,
    Greedy,
    Exact,
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PolicyKind::Random => "random",
            PolicyKind::Greedy => "greedy",
            PolicyKind::Exact => "exact",
        })
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(PolicyKind::Random),
            "greedy" => Ok(PolicyKind::Greedy),
            "exact" => Ok(PolicyKind::Exact),
            other => Err(Error::InvalidConfig(format!(
                "unknown policy '{other}', expected random, greedy, or exact"
            ))),
        }
    }
}

/// Runs one policy over a fresh simulator. `seed` feeds the random policy
/// only; `oracle_limit` bounds the exact one.
pub fn run_policy(
    sim: SequencerSim,
    policy: PolicyKind,
    seed: u64,
    oracle_limit: usize,
) -> Result<Trajectory> {
    match policy {
        PolicyKind::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            sequence_random(sim, &mut rng)
        }
        PolicyKind::Greedy => sequence_greedy(sim),
        PolicyKind::Exact => sequence_exact(sim, oracle_limit),
    }
}

/// Mean absolute percentage error of candidate completed-counts against
/// oracle counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapeResult {
    pub percent: f64,
    /// Entries that contributed to the mean.
    pub used: usize,
    /// Entries skipped because the oracle count was zero.
    pub skipped: usize,
}

/// `mean(|candidate - oracle| / oracle) x 100` over paired counts.
///
/// Zero-oracle entries cannot be scored and are skipped but reported; if
/// every entry is skipped the MAPE is undefined and that is an error.
pub fn mape(candidate_counts: &[usize], oracle_counts: &[usize]) -> Result<MapeResult> {
    if candidate_counts.len() != oracle_counts.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} candidate counts vs {} oracle counts",
            candidate_counts.len(),
            oracle_counts.len()
        )));
    }
    let mut sum = 0.0;
    let mut used = 0;
    let mut skipped = 0;
    for (&c, &o) in candidate_counts.iter().zip(oracle_counts) {
        if o == 0 {
            skipped += 1;
            continue;
        }
        sum += (c as f64 - o as f64).abs() / o as f64;
        used += 1;
    }
    if used == 0 {
        return Err(Error::MapeUndefined(skipped));
    }
    Ok(MapeResult {
        percent: sum / used as f64 * 100.0,
        used,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{
        resample_deadlines, sample_scenario, Agent, CompatibilityMatrix, NominalTravel,
        SampleConfig, Task,
    };

    const NOMINAL: NominalTravel = NominalTravel;

    /// Single agent at the origin, unit speed, unit compatibility (so every
    /// completion takes exactly 10 s), tasks as (x, y, deadline).
    fn desk_scenario(tasks: &[(f64, f64, f64)]) -> Scenario {
        let tasks: Vec<Task> = tasks
            .iter()
            .enumerate()
            .map(|(id, &(x, y, deadline))| Task {
                id,
                x,
                y,
                deadline,
                category: 0,
            })
            .collect();
        let agents = vec![Agent {
            id: 0,
            velocity: 1.0,
            depot: (0.0, 0.0),
        }];
        let compat = CompatibilityMatrix::new(1, tasks.len(), vec![1.0; tasks.len()]).unwrap();
        let t_max = tasks.len();
        Scenario::new(tasks, agents, compat, t_max, 0).unwrap()
    }

    fn fresh<'a>(scenario: &'a Scenario, assigned: Vec<usize>) -> SequencerSim<'a> {
        SequencerSim::new(scenario, 0, assigned, &NOMINAL).unwrap()
    }

    #[test]
    fn reward_is_zero_without_expiries() {
        assert_eq!(reward(0), 0.0);
    }

    #[test]
    fn reward_at_ten_expiries() {
        assert!((reward(10) - (1.0 - std::f64::consts::E)).abs() < 1e-12);
    }

    #[test]
    fn reward_strictly_decreases() {
        for k in 0..50 {
            assert!(reward(k + 1) < reward(k));
        }
    }

    #[test]
    fn state_features_at_start() {
        let s = desk_scenario(&[(0.0, 0.0, 100.0), (30.0, 40.0, 100.0)]);
        let sim = fresh(&s, vec![0, 1]);
        let state = sim.build_state();
        assert_eq!(state.clock, 0.0);
        assert_eq!(state.agent_position, (0.0, 0.0));
        // coincident with the depot: arrival 0
        assert_eq!(state.features[0].arrival_time, 0.0);
        assert_eq!(state.features[1].arrival_time, 50.0);
        assert_eq!(state.features[0].completion_time, 10.0);
        assert_eq!(state.features[0].time_to_deadline, 100.0);
    }

    #[test]
    fn time_to_deadline_is_deadline_minus_clock() {
        let s = desk_scenario(&[(0.0, 0.0, 100.0), (10.0, 0.0, 100.0)]);
        let mut sim = fresh(&s, vec![0, 1]);
        sim.step(0).unwrap(); // clock -> 10
        sim.step(1).unwrap(); // clock -> 10 + 10 + 10 = 30
        assert_eq!(sim.clock(), 30.0);
        // deadline 100 at clock 30
        let state = sim.build_state();
        assert_eq!(state.features[0].time_to_deadline, 70.0);
    }

    #[test]
    fn unassigned_task_is_masked_even_when_feasible() {
        let s = desk_scenario(&[(1.0, 0.0, 1000.0), (2.0, 0.0, 1000.0)]);
        let sim = fresh(&s, vec![1]);
        let state = sim.build_state();
        assert!(!state.mask[0]);
        assert!(state.mask[1]);
    }

    #[test]
    fn mask_boundary_counts_exact_finish_as_feasible() {
        // travel 30 + completion 10 against deadline exactly 40
        let s = desk_scenario(&[(30.0, 0.0, 40.0)]);
        assert!(fresh(&s, vec![0]).build_state().mask[0]);
        // one second short
        let s = desk_scenario(&[(30.0, 0.0, 39.0)]);
        assert!(!fresh(&s, vec![0]).build_state().mask[0]);
    }

    #[test]
    fn completed_task_is_masked() {
        let s = desk_scenario(&[(1.0, 0.0, 1000.0), (2.0, 0.0, 1000.0)]);
        let mut sim = fresh(&s, vec![0, 1]);
        let out = sim.step(0).unwrap();
        assert!(!out.state.mask[0]);
        assert!(out.state.mask[1]);
    }

    #[test]
    fn step_advances_clock_by_travel_plus_completion() {
        let s = desk_scenario(&[(25.0, 0.0, 1000.0)]);
        let mut sim = fresh(&s, vec![0]);
        let out = sim.step(0).unwrap();
        assert_eq!(sim.clock(), 35.0);
        assert!(out.done);
        assert_eq!(out.reward, 0.0);
        let t = sim.into_trajectory();
        assert_eq!(t.completed_count, 1);
        assert_eq!(t.expired_count, 0);
        assert_eq!(t.entries[0].depart_time, 0.0);
        assert_eq!(t.entries[0].arrive_time, 25.0);
        assert_eq!(t.entries[0].finish_time, 35.0);
    }

    #[test]
    fn serving_far_task_first_expires_the_near_one() {
        // far task: travel 100 + 10; near task deadline 50 passes meanwhile
        let s = desk_scenario(&[(100.0, 0.0, 1000.0), (0.0, 5.0, 50.0)]);
        let mut sim = fresh(&s, vec![0, 1]);
        let out = sim.step(0).unwrap();
        assert_eq!(out.reward, reward(1));
        assert!(out.done);
        let t = sim.into_trajectory();
        assert_eq!(t.completed_count, 1);
        assert_eq!(t.expired_count, 1);
        assert_eq!(t.missed, vec![1]);
    }

    #[test]
    fn stepping_a_masked_task_is_an_error() {
        let s = desk_scenario(&[(1.0, 0.0, 1000.0), (2.0, 0.0, 1000.0)]);
        let mut sim = fresh(&s, vec![0]);
        let err = sim.step(1).unwrap_err();
        assert!(matches!(err, Error::MaskedTask { task: 1, .. }), "{err}");
    }

    #[test]
    fn random_policy_with_no_tasks_returns_empty_trajectory() {
        let s = desk_scenario(&[(1.0, 0.0, 1000.0)]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let t = sequence_random(fresh(&s, vec![]), &mut rng).unwrap();
        assert!(t.entries.is_empty());
        assert_eq!(t.completed_count, 0);
        assert_eq!(t.final_clock, 0.0);
    }

    #[test]
    fn random_policy_visits_everything_under_loose_deadlines() {
        let s = desk_scenario(&[
            (10.0, 0.0, 1e12),
            (0.0, 90.0, 1e12),
            (50.0, 50.0, 1e12),
            (3.0, 4.0, 1e12),
        ]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t = sequence_random(fresh(&s, vec![0, 1, 2, 3]), &mut rng).unwrap();
        assert_eq!(t.completed_count, 4);
        assert!(t.missed.is_empty());
    }

    #[test]
    fn random_policy_is_seed_deterministic() {
        let s = sample_scenario(&SampleConfig::new(12, 1, 33)).unwrap();
        let assigned: Vec<usize> = (0..12).collect();
        let mut r1 = ChaCha8Rng::seed_from_u64(7);
        let mut r2 = ChaCha8Rng::seed_from_u64(7);
        let t1 = sequence_random(fresh(&s, assigned.clone()), &mut r1).unwrap();
        let t2 = sequence_random(fresh(&s, assigned), &mut r2).unwrap();
        assert_eq!(t1, t2);
    }

    #[test]
    fn greedy_with_one_feasible_task() {
        let s = desk_scenario(&[(10.0, 0.0, 100.0)]);
        let t = sequence_greedy(fresh(&s, vec![0])).unwrap();
        assert_eq!(t.completed_count, 1);
        assert_eq!(t.entries[0].task_id, 0);
    }

    #[test]
    fn greedy_serves_tightest_slack_first() {
        // task 0: finish 20, slack 480; task 1: finish 60, slack 5
        let s = desk_scenario(&[(10.0, 0.0, 500.0), (50.0, 0.0, 65.0)]);
        let t = sequence_greedy(fresh(&s, vec![0, 1])).unwrap();
        assert_eq!(t.entries[0].task_id, 1);
    }

    #[test]
    fn greedy_beats_random_on_average() {
        let mut greedy_total = 0usize;
        let mut random_total = 0usize;
        let mut random_runs = 0usize;
        for inst in 0..20 {
            let s = sample_scenario(&SampleConfig::new(10, 1, 1000 + inst)).unwrap();
            let s = resample_deadlines(&s, (500.0, 4000.0), 2000 + inst).unwrap();
            let assigned: Vec<usize> = (0..10).collect();
            greedy_total += sequence_greedy(fresh(&s, assigned.clone()))
                .unwrap()
                .completed_count;
            for seed in 0..5 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                random_total += sequence_random(fresh(&s, assigned.clone()), &mut rng)
                    .unwrap()
                    .completed_count;
                random_runs += 1;
            }
        }
        let greedy_mean = greedy_total as f64 / 20.0;
        let random_mean = random_total as f64 / random_runs as f64;
        assert!(
            greedy_mean >= random_mean,
            "greedy mean {greedy_mean} vs random mean {random_mean}"
        );
    }

    #[test]
    fn exact_completes_all_under_loose_deadlines() {
        let s = desk_scenario(&[(10.0, 0.0, 1e12), (0.0, 90.0, 1e12), (50.0, 50.0, 1e12)]);
        let t = sequence_exact(fresh(&s, vec![0, 1, 2]), DEFAULT_ORACLE_LIMIT).unwrap();
        assert_eq!(t.completed_count, 3);
    }

    #[test]
    fn exact_recovers_the_order_greedy_misses() {
        // Greedy picks task 1 first (slack 25 vs 80), which strands task 0;
        // the 0 -> 1 -> 2 order completes everything.
        let s = desk_scenario(&[(10.0, 0.0, 100.0), (0.0, 60.0, 95.0), (0.0, 1.0, 10000.0)]);
        let greedy = sequence_greedy(fresh(&s, vec![0, 1, 2])).unwrap();
        assert_eq!(greedy.completed_count, 2);
        assert_eq!(greedy.entries[0].task_id, 1);
        let exact = sequence_exact(fresh(&s, vec![0, 1, 2]), DEFAULT_ORACLE_LIMIT).unwrap();
        assert_eq!(exact.completed_count, 3);
        assert_eq!(
            exact.entries.iter().map(|e| e.task_id).collect::<Vec<_>>(),
            vec![0, 1, 2]
        );
    }

    #[test]
    fn exact_rejects_oversized_assignments() {
        let s = sample_scenario(&SampleConfig::new(20, 1, 3)).unwrap();
        let err = sequence_exact(fresh(&s, (0..20).collect()), DEFAULT_ORACLE_LIMIT).unwrap_err();
        assert!(
            matches!(
                err,
                Error::OracleLimit {
                    agent: 0,
                    assigned: 20,
                    limit: 16
                }
            ),
            "{err}"
        );
    }

    /// Reference sequencer: tries every execution order, skipping tasks that
    /// cannot finish in time at their turn, and keeps the best outcome.
    fn brute_force(scenario: &Scenario, assigned: &[usize]) -> (usize, f64) {
        fn recurse(
            scenario: &Scenario,
            remaining: &mut Vec<usize>,
            clock: f64,
            position: GraphNode,
            completed: usize,
            best: &mut (usize, f64),
        ) {
            // count an order's outcome when no continuation improves it
            let mut extended = false;
            for i in 0..remaining.len() {
                let t = remaining[i];
                let travel = NOMINAL.travel_time(scenario, 0, position, t);
                let arrive = clock + travel;
                let finish = arrive + completion_time(0, t, scenario.compat());
                if finish <= scenario.tasks()[t].deadline {
                    extended = true;
                    remaining.swap_remove(i);
                    recurse(
                        scenario,
                        remaining,
                        finish,
                        GraphNode::Task(t),
                        completed + 1,
                        best,
                    );
                    remaining.push(t);
                    let last = remaining.len() - 1;
                    remaining.swap(i, last);
                }
            }
            if !extended && (completed > best.0 || (completed == best.0 && clock < best.1)) {
                *best = (completed, clock);
            }
        }
        let mut best = (0usize, f64::INFINITY);
        let mut remaining = assigned.to_vec();
        recurse(
            scenario,
            &mut remaining,
            0.0,
            GraphNode::Depot(scenario.depot_node(0)),
            0,
            &mut best,
        );
        if best.1 == f64::INFINITY {
            best.1 = 0.0; // nothing feasible: the agent never moves
        }
        best
    }

    #[test]
    fn exact_matches_brute_force_on_random_instances() {
        for inst in 0..30u64 {
            let n_tasks = 3 + (inst % 6) as usize; // 3..=8 tasks
            let s = sample_scenario(&SampleConfig::new(n_tasks, 1, 500 + inst)).unwrap();
            let s = resample_deadlines(&s, (400.0, 3000.0), 700 + inst).unwrap();
            let assigned: Vec<usize> = (0..n_tasks).collect();
            let t = sequence_exact(fresh(&s, assigned.clone()), DEFAULT_ORACLE_LIMIT).unwrap();
            let (bf_count, bf_clock) = brute_force(&s, &assigned);
            assert_eq!(t.completed_count, bf_count, "instance {inst}");
            assert!(
                (t.final_clock - bf_clock).abs() < 1e-9,
                "instance {inst}: clock {} vs brute force {}",
                t.final_clock,
                bf_clock
            );
        }
    }

    #[test]
    fn exact_dominates_greedy_everywhere() {
        for inst in 0..25 {
            let s = sample_scenario(&SampleConfig::new(8, 1, 100 + inst)).unwrap();
            let s = resample_deadlines(&s, (400.0, 3000.0), 300 + inst).unwrap();
            let assigned: Vec<usize> = (0..8).collect();
            let exact = sequence_exact(fresh(&s, assigned.clone()), DEFAULT_ORACLE_LIMIT).unwrap();
            let greedy = sequence_greedy(fresh(&s, assigned)).unwrap();
            assert!(
                exact.completed_count >= greedy.completed_count,
                "instance {inst}"
            );
        }
    }

    #[test]
    fn trajectory_bookkeeping_is_consistent() {
        let s = sample_scenario(&SampleConfig::new(9, 1, 77)).unwrap();
        let s = resample_deadlines(&s, (400.0, 2500.0), 78).unwrap();
        let assigned: Vec<usize> = (0..9).collect();
        let t = sequence_greedy(fresh(&s, assigned)).unwrap();
        assert_eq!(t.completed_count + t.expired_count, 9);
        for e in &t.entries {
            let task = &s.tasks()[e.task_id];
            assert!(e.finish_time <= task.deadline, "feasible at selection");
            assert!(e.arrive_time >= e.depart_time);
            let comp = completion_time(0, e.task_id, s.compat());
            assert!((e.finish_time - e.arrive_time - comp).abs() < 1e-9);
        }
        for w in t.entries.windows(2) {
            assert!(w[1].finish_time > w[0].finish_time);
            assert_eq!(w[1].depart_time, w[0].finish_time);
        }
    }

    #[test]
    fn run_policy_dispatches_and_is_deterministic() {
        let s = sample_scenario(&SampleConfig::new(10, 1, 21)).unwrap();
        let assigned: Vec<usize> = (0..10).collect();
        for policy in [PolicyKind::Random, PolicyKind::Greedy, PolicyKind::Exact] {
            let a = run_policy(fresh(&s, assigned.clone()), policy, 13, 16).unwrap();
            let b = run_policy(fresh(&s, assigned.clone()), policy, 13, 16).unwrap();
            assert_eq!(a, b, "{policy}");
        }
    }

    #[test]
    fn policy_kind_round_trips_through_strings() {
        for (name, kind) in [
            ("random", PolicyKind::Random),
            ("greedy", PolicyKind::Greedy),
            ("exact", PolicyKind::Exact),
        ] {
            assert_eq!(name.parse::<PolicyKind>().unwrap(), kind);
            assert_eq!(kind.to_string(), name);
        }
        assert!("fast".parse::<PolicyKind>().is_err());
    }

    #[test]
    fn mape_of_identical_counts_is_zero() {
        let r = mape(&[3, 5, 7], &[3, 5, 7]).unwrap();
        assert_eq!(r.percent, 0.0);
        assert_eq!(r.used, 3);
    }

    #[test]
    fn mape_single_entry() {
        assert_eq!(mape(&[9], &[10]).unwrap().percent, 10.0);
    }

    #[test]
    fn mape_averages_entry_errors() {
        assert_eq!(mape(&[8, 10], &[10, 10]).unwrap().percent, 10.0);
    }

    #[test]
    fn mape_skips_zero_oracle_entries() {
        let r = mape(&[5, 9], &[0, 10]).unwrap();
        assert_eq!(r.percent, 10.0);
        assert_eq!(r.skipped, 1);
        assert!(matches!(mape(&[5], &[0]), Err(Error::MapeUndefined(1))));
    }

    #[test]
    fn mape_requires_equal_lengths() {
        assert!(matches!(
            mape(&[1, 2], &[1]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn trajectory_csv_lists_all_assigned_tasks() {
        let s = desk_scenario(&[(100.0, 0.0, 1000.0), (0.0, 5.0, 50.0)]);
        let mut sim = fresh(&s, vec![0, 1]);
        sim.step(0).unwrap();
        let csv = sim.into_trajectory().to_csv(&s);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "task_id,depart_time,arrive_time,finish_time,deadline,status"
        );
        assert_eq!(lines[1], "0,0,100,110,1000,completed");
        assert_eq!(lines[2], "1,,,,50,expired");
    }
}
