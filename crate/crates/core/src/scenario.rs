//! World model: tasks, agents, compatibility, travel kinematics, sampling,
//! and scenario file I/O.
//!
//! Everything here is immutable after construction and safe to share across
//! threads. Sampling draws from an explicit seeded stream, so a scenario is a
//! pure function of its [`SampleConfig`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};

/// Smallest compatibility value a matrix accepts by default.
///
/// Completion time is `10 / C`, which diverges as `C -> 0`; clamping at 0.01
/// bounds completion times at 1000 s without materially changing a uniform
/// draw over (0, 1].
pub const DEFAULT_C_MIN: f64 = 0.01;

/// Default mission area edge length in meters (a 1 km square).
pub const DEFAULT_AREA: f64 = 1000.0;

/// Default deadline sampling range in seconds.
pub const DEFAULT_DEADLINE_RANGE: (f64, f64) = (500.0, 5e4);

/// Default number of task categories.
pub const DEFAULT_CATEGORIES: u8 = 5;

/// A task site with a hard completion deadline.
///
/// `category` is a metadata label; it does not affect kinematics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Task {
    pub id: usize,
    /// X coordinate in meters.
    pub x: f64,
    /// Y coordinate in meters.
    pub y: f64,
    /// Absolute deadline in seconds from mission start; must be positive.
    pub deadline: f64,
    pub category: u8,
}

/// A mobile agent with constant speed, departing from a depot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Agent {
    pub id: usize,
    /// Travel speed in meters per second; must be positive.
    pub velocity: f64,
    /// Start position (x, y) in meters.
    pub depot: (f64, f64),
}

/// Per-(agent, task) compatibility values in `[c_min, 1]`.
///
/// Higher compatibility means faster completion: completing a task takes
/// `10 / C` seconds. Entries below the matrix's `c_min` are rejected at
/// construction so completion times stay bounded.
#[derive(Debug, Clone, PartialEq)]
pub struct CompatibilityMatrix {
    n_agents: usize,
    n_tasks: usize,
    c_min: f64,
    /// Row-major, `values[agent * n_tasks + task]`.
    values: Vec<f64>,
}

impl CompatibilityMatrix {
    /// Builds a matrix from a flat row-major buffer using [`DEFAULT_C_MIN`].
    pub fn new(n_agents: usize, n_tasks: usize, values: Vec<f64>) -> Result<Self> {
        Self::with_c_min(n_agents, n_tasks, values, DEFAULT_C_MIN)
    }

    /// Builds a matrix from a flat row-major buffer with an explicit clamp.
    pub fn with_c_min(
        n_agents: usize,
        n_tasks: usize,
        values: Vec<f64>,
        c_min: f64,
    ) -> Result<Self> {
        if !(c_min > 0.0 && c_min <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "c_min must lie in (0, 1], got {c_min}"
            )));
        }
        if values.len() != n_agents * n_tasks {
            return Err(Error::DimensionMismatch(format!(
                "compatibility buffer holds {} entries, expected {} x {} = {}",
                values.len(),
                n_agents,
                n_tasks,
                n_agents * n_tasks
            )));
        }
        for (idx, &v) in values.iter().enumerate() {
            if !(v >= c_min && v <= 1.0) {
                return Err(Error::InvalidScenario(format!(
                    "compatibility[agent {}][task {}] = {} outside [{}, 1]",
                    idx / n_tasks,
                    idx % n_tasks,
                    v,
                    c_min
                )));
            }
        }
        Ok(Self {
            n_agents,
            n_tasks,
            c_min,
            values,
        })
    }

    /// Builds a matrix from per-agent rows.
    pub fn from_rows(rows: Vec<Vec<f64>>, c_min: f64) -> Result<Self> {
        let n_agents = rows.len();
        let n_tasks = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(n_agents * n_tasks);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n_tasks {
                return Err(Error::DimensionMismatch(format!(
                    "compatibility row {} has {} entries, expected {}",
                    i,
                    row.len(),
                    n_tasks
                )));
            }
            values.extend(row);
        }
        Self::with_c_min(n_agents, n_tasks, values, c_min)
    }

    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    pub fn n_tasks(&self) -> usize {
        self.n_tasks
    }

    pub fn c_min(&self) -> f64 {
        self.c_min
    }

    pub fn get(&self, agent: usize, task: usize) -> f64 {
        self.values[agent * self.n_tasks + task]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.values
            .chunks(self.n_tasks)
            .map(<[f64]>::to_vec)
            .collect()
    }
}

/// Time for `agent` to travel between two points, in seconds.
///
/// Straight-line Euclidean distance divided by the agent's constant speed.
pub fn travel_time(from: (f64, f64), to: (f64, f64), agent: &Agent) -> f64 {
    let dx = to.0 - from.0;
    let dy = to.1 - from.1;
    (dx * dx + dy * dy).sqrt() / agent.velocity
}

/// Time for an agent to complete a task, in seconds: `10 / C`.
pub fn completion_time(agent_id: usize, task_id: usize, compat: &CompatibilityMatrix) -> f64 {
    10.0 / compat.get(agent_id, task_id)
}

/// A node of the mission graph: a task site or one of the distinct depots.
///
/// Depots are deduplicated by coordinates across agents; with the default
/// shared depot there is exactly one depot node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GraphNode {
    Depot(usize),
    Task(usize),
}

/// Travel-time source used by the sequencing simulator.
///
/// The nominal model derives times from scenario kinematics; perturbed models
/// wrap it to inflate selected edges.
pub trait TravelModel: Sync {
    fn travel_time(
        &self,
        scenario: &Scenario,
        agent_id: usize,
        from: GraphNode,
        to_task: usize,
    ) -> f64;
}

/// Unperturbed travel times straight from scenario kinematics.
#[derive(Debug, Clone, Copy, Default)]
pub struct NominalTravel;

impl TravelModel for NominalTravel {
    fn travel_time(
        &self,
        scenario: &Scenario,
        agent_id: usize,
        from: GraphNode,
        to_task: usize,
    ) -> f64 {
        let agent = &scenario.agents()[agent_id];
        let to = scenario.node_position(GraphNode::Task(to_task));
        travel_time(scenario.node_position(from), to, agent)
    }
}

/// The full world description all planning runs against.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    tasks: Vec<Task>,
    agents: Vec<Agent>,
    compat: CompatibilityMatrix,
    t_max: usize,
    seed: u64,
    /// `depot_of[agent] = depot node index`; agents sharing coordinates share a node.
    depot_of: Vec<usize>,
    depot_positions: Vec<(f64, f64)>,
}

impl Scenario {
    pub fn new(
        tasks: Vec<Task>,
        agents: Vec<Agent>,
        compat: CompatibilityMatrix,
        t_max: usize,
        seed: u64,
    ) -> Result<Self> {
        if tasks.is_empty() {
            return Err(Error::InvalidScenario("no tasks".into()));
        }
        if agents.is_empty() {
            return Err(Error::InvalidScenario("no agents".into()));
        }
        for (i, t) in tasks.iter().enumerate() {
            if t.id != i {
                return Err(Error::InvalidScenario(format!(
                    "task ids must be dense and ordered: position {} holds id {}",
                    i, t.id
                )));
            }
            if t.deadline.is_nan() || t.deadline <= 0.0 {
                return Err(Error::InvalidScenario(format!(
                    "task {} deadline must be positive, got {}",
                    t.id, t.deadline
                )));
            }
            if !t.x.is_finite() || !t.y.is_finite() {
                return Err(Error::InvalidScenario(format!(
                    "task {} has non-finite coordinates",
                    t.id
                )));
            }
        }
        for (j, a) in agents.iter().enumerate() {
            if a.id != j {
                return Err(Error::InvalidScenario(format!(
                    "agent ids must be dense and ordered: position {} holds id {}",
                    j, a.id
                )));
            }
            if !(a.velocity > 0.0 && a.velocity.is_finite()) {
                return Err(Error::InvalidScenario(format!(
                    "agent {} velocity must be positive, got {}",
                    a.id, a.velocity
                )));
            }
        }
        if compat.n_agents() != agents.len() || compat.n_tasks() != tasks.len() {
            return Err(Error::DimensionMismatch(format!(
                "compatibility is {} x {}, scenario has {} agents and {} tasks",
                compat.n_agents(),
                compat.n_tasks(),
                agents.len(),
                tasks.len()
            )));
        }
        if t_max == 0 {
            return Err(Error::InvalidScenario("t_max must be at least 1".into()));
        }
        if agents.len() * t_max < tasks.len() {
            return Err(Error::InvalidScenario(format!(
                "infeasible load cap: {} agents x t_max {} < {} tasks",
                agents.len(),
                t_max,
                tasks.len()
            )));
        }

        let mut depot_positions: Vec<(f64, f64)> = Vec::new();
        let depot_of = agents
            .iter()
            .map(
                |a| match depot_positions.iter().position(|&p| p == a.depot) {
                    Some(i) => i,
                    None => {
                        depot_positions.push(a.depot);
                        depot_positions.len() - 1
                    }
                },
            )
            .collect();

        Ok(Self {
            tasks,
            agents,
            compat,
            t_max,
            seed,
            depot_of,
            depot_positions,
        })
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn compat(&self) -> &CompatibilityMatrix {
        &self.compat
    }

    pub fn n_tasks(&self) -> usize {
        self.tasks.len()
    }

    pub fn n_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn t_max(&self) -> usize {
        self.t_max
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Depot node index an agent departs from.
    pub fn depot_node(&self, agent_id: usize) -> usize {
        self.depot_of[agent_id]
    }

    /// Number of distinct depot positions across agents.
    pub fn n_depots(&self) -> usize {
        self.depot_positions.len()
    }

    pub fn node_position(&self, node: GraphNode) -> (f64, f64) {
        match node {
            GraphNode::Depot(d) => self.depot_positions[d],
            GraphNode::Task(i) => (self.tasks[i].x, self.tasks[i].y),
        }
    }

    /// Stable content fingerprint binding derived artifacts to this scenario.
    ///
    /// Covers the world itself — tasks, agents, and compatibility — but not
    /// the per-agent cap or the sampling seed, so an allocation run may
    /// tighten `t_max` without unbinding its pool from the scenario file.
    pub fn fingerprint(&self) -> String {
        let mut h: u64 = 0xcbf29ce484222325;
        let mut put = |word: u64| {
            for b in word.to_le_bytes() {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x100000001b3);
            }
        };
        put(self.tasks.len() as u64);
        put(self.agents.len() as u64);
        for t in &self.tasks {
            put(t.x.to_bits());
            put(t.y.to_bits());
            put(t.deadline.to_bits());
            put(u64::from(t.category));
        }
        for a in &self.agents {
            put(a.velocity.to_bits());
            put(a.depot.0.to_bits());
            put(a.depot.1.to_bits());
        }
        for &v in &self.compat.values {
            put(v.to_bits());
        }
        format!("{h:016x}")
    }

    /// The same world under a different per-agent cap; the cap must keep the
    /// scenario feasible.
    pub fn with_t_max(&self, t_max: usize) -> Result<Scenario> {
        Scenario::new(
            self.tasks.clone(),
            self.agents.clone(),
            self.compat.clone(),
            t_max,
            self.seed,
        )
    }
}

/// Per-agent task cap used when none is given explicitly:
/// `floor(n_tasks / n_agents) + 10`.
pub fn auto_t_max(n_tasks: usize, n_agents: usize) -> usize {
    n_tasks / n_agents + 10
}

/// Configuration for [`sample_scenario`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub n_tasks: usize,
    pub n_agents: usize,
    /// Square mission area edge length, meters.
    pub area: f64,
    /// Closed deadline sampling range, seconds.
    pub deadline_range: (f64, f64),
    /// Shared agent speed, meters per second.
    pub velocity: f64,
    /// Lower clamp for sampled compatibility values.
    pub c_min: f64,
    /// Per-agent task cap; `None` applies [`auto_t_max`].
    pub t_max: Option<usize>,
    /// Number of task category labels.
    pub categories: u8,
    pub seed: u64,
}

impl SampleConfig {
    pub fn new(n_tasks: usize, n_agents: usize, seed: u64) -> Self {
        Self {
            n_tasks,
            n_agents,
            area: DEFAULT_AREA,
            deadline_range: DEFAULT_DEADLINE_RANGE,
            velocity: 1.0,
            c_min: DEFAULT_C_MIN,
            t_max: None,
            categories: DEFAULT_CATEGORIES,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_tasks == 0 {
            return Err(Error::InvalidConfig("n_tasks must be at least 1".into()));
        }
        if self.n_agents == 0 {
            return Err(Error::InvalidConfig("n_agents must be at least 1".into()));
        }
        if !(self.area > 0.0 && self.area.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "area must be positive, got {}",
                self.area
            )));
        }
        let (lo, hi) = self.deadline_range;
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "deadline range must satisfy 0 < lo <= hi, got [{lo}, {hi}]"
            )));
        }
        if !(self.velocity > 0.0 && self.velocity.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "velocity must be positive, got {}",
                self.velocity
            )));
        }
        if !(self.c_min > 0.0 && self.c_min <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "c_min must lie in (0, 1], got {}",
                self.c_min
            )));
        }
        if self.categories == 0 {
            return Err(Error::InvalidConfig("categories must be at least 1".into()));
        }
        Ok(())
    }
}

/// Samples a scenario: task locations uniform over the square area, deadlines
/// uniform over the configured range, compatibility uniform over
/// `[c_min, 1]`. Agents share one central depot and the configured speed.
///
/// Fully determined by `config.seed`.
pub fn sample_scenario(config: &SampleConfig) -> Result<Scenario> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let tasks = (0..config.n_tasks)
        .map(|id| Task {
            id,
            x: rng.random_range(0.0..=config.area),
            y: rng.random_range(0.0..=config.area),
            deadline: rng.random_range(config.deadline_range.0..=config.deadline_range.1),
            category: rng.random_range(0..config.categories),
        })
        .collect();

    let depot = (config.area / 2.0, config.area / 2.0);
    let agents = (0..config.n_agents)
        .map(|id| Agent {
            id,
            velocity: config.velocity,
            depot,
        })
        .collect();

    let values = (0..config.n_agents * config.n_tasks)
        .map(|_| rng.random_range(config.c_min..=1.0))
        .collect();
    let compat =
        CompatibilityMatrix::with_c_min(config.n_agents, config.n_tasks, values, config.c_min)?;

    let t_max = config
        .t_max
        .unwrap_or_else(|| auto_t_max(config.n_tasks, config.n_agents));
    Scenario::new(tasks, agents, compat, t_max, config.seed)
}

/// Returns a copy of `scenario` with deadlines redrawn uniformly over `range`.
///
/// Locations, agents, and compatibility are untouched; used for repeated
/// sequencing experiments over fresh deadline draws.
pub fn resample_deadlines(scenario: &Scenario, range: (f64, f64), seed: u64) -> Result<Scenario> {
    let (lo, hi) = range;
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "deadline range must satisfy 0 < lo <= hi, got [{lo}, {hi}]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tasks = scenario
        .tasks()
        .iter()
        .map(|t| Task {
            deadline: rng.random_range(lo..=hi),
            ..*t
        })
        .collect();
    Scenario::new(
        tasks,
        scenario.agents().to_vec(),
        scenario.compat().clone(),
        scenario.t_max(),
        scenario.seed(),
    )
}

// --- file format ---------------------------------------------------------

pub(crate) const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct TaskFile {
    id: usize,
    x: f64,
    y: f64,
    deadline: f64,
    category: u8,
}

#[derive(Serialize, Deserialize)]
struct AgentFile {
    id: usize,
    velocity: f64,
    depot: [f64; 2],
}

#[derive(Serialize, Deserialize)]
struct ScenarioFile {
    schema_version: u32,
    tasks: Vec<TaskFile>,
    agents: Vec<AgentFile>,
    /// Row-major n_agents x n_tasks.
    compatibility: Vec<Vec<f64>>,
    t_max: usize,
    seed: u64,
    #[serde(default = "default_c_min")]
    c_min: f64,
}

fn default_c_min() -> f64 {
    DEFAULT_C_MIN
}

/// Serializes a scenario to pretty-printed JSON.
pub fn scenario_to_json(scenario: &Scenario) -> String {
    let file = ScenarioFile {
        schema_version: SCHEMA_VERSION,
        tasks: scenario
            .tasks()
            .iter()
            .map(|t| TaskFile {
                id: t.id,
                x: t.x,
                y: t.y,
                deadline: t.deadline,
                category: t.category,
            })
            .collect(),
        agents: scenario
            .agents()
            .iter()
            .map(|a| AgentFile {
                id: a.id,
                velocity: a.velocity,
                depot: [a.depot.0, a.depot.1],
            })
            .collect(),
        compatibility: scenario.compat().rows(),
        t_max: scenario.t_max(),
        seed: scenario.seed(),
        c_min: scenario.compat().c_min(),
    };
    serde_json::to_string_pretty(&file).expect("scenario serialization cannot fail")
}

/// Parses a scenario from JSON text, enforcing all scenario invariants.
pub fn scenario_from_json(text: &str, origin: &Path) -> Result<Scenario> {
    let file: ScenarioFile = serde_json::from_str(text).map_err(|source| Error::Parse {
        path: origin.to_path_buf(),
        source,
    })?;
    let tasks = file
        .tasks
        .into_iter()
        .map(|t| Task {
            id: t.id,
            x: t.x,
            y: t.y,
            deadline: t.deadline,
            category: t.category,
        })
        .collect();
    let agents: Vec<Agent> = file
        .agents
        .into_iter()
        .map(|a| Agent {
            id: a.id,
            velocity: a.velocity,
            depot: (a.depot[0], a.depot[1]),
        })
        .collect();
    if file.compatibility.len() != agents.len() {
        return Err(Error::DimensionMismatch(format!(
            "compatibility has {} rows, expected one per agent ({})",
            file.compatibility.len(),
            agents.len()
        )));
    }
    let compat = CompatibilityMatrix::from_rows(file.compatibility, file.c_min)?;
    Scenario::new(tasks, agents, compat, file.t_max, file.seed)
}

pub fn save_scenario(scenario: &Scenario, path: &Path) -> Result<()> {
    std::fs::write(path, scenario_to_json(scenario)).map_err(|source| Error::Io {
        action: "write",
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        action: "read",
        path: path.to_path_buf(),
        source,
    })?;
    scenario_from_json(&text, path)
}
