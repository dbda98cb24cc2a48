//! Condensed COA encoding, the diversity + compatibility objective, and the
//! elitist genetic algorithm that produces constraint-satisfying pools.
//!
//! A condensed COA stores, per task, the index of the owning agent. That
//! encoding makes "every task has exactly one owner" structural; the only
//! constraint left to enforce is the per-agent load cap, handled by
//! [`repair`]. The GA's genome is an entire pool, because the diversity term
//! couples all pool members through a minimum spanning tree.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scenario::{CompatibilityMatrix, Scenario};
use crate::seed::{indexed_seed, labeled_seed};

/// One task-to-agent assignment: `assignment[task] = owning agent`.
///
/// Equivalent to a binary agent x task matrix with exactly one 1 per column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CondensedCoa {
    assignment: Vec<usize>,
    n_agents: usize,
}

impl CondensedCoa {
    pub fn new(assignment: Vec<usize>, n_agents: usize) -> Result<Self> {
        if assignment.is_empty() {
            return Err(Error::InvalidConfig("assignment must be non-empty".into()));
        }
        if let Some(&bad) = assignment.iter().find(|&&a| a >= n_agents) {
            return Err(Error::InvalidConfig(format!(
                "assignment references agent {bad}, but only {n_agents} agents exist"
            )));
        }
        Ok(Self {
            assignment,
            n_agents,
        })
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    pub fn n_tasks(&self) -> usize {
        self.assignment.len()
    }

    /// Tasks owned by `agent`, in ascending task order.
    pub fn tasks_of(&self, agent: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|&(_, &a)| a == agent)
            .map(|(j, _)| j)
            .collect()
    }

    /// Task count per agent.
    pub fn loads(&self) -> Vec<usize> {
        let mut loads = vec![0; self.n_agents];
        for &a in &self.assignment {
            loads[a] += 1;
        }
        loads
    }

    /// The explicit binary matrix view, rows = agents, columns = tasks.
    pub fn binary_matrix(&self) -> Vec<Vec<u8>> {
        let mut m = vec![vec![0u8; self.assignment.len()]; self.n_agents];
        for (j, &a) in self.assignment.iter().enumerate() {
            m[a][j] = 1;
        }
        m
    }
}

/// A set of condensed COAs over one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct CoaPool {
    coas: Vec<CondensedCoa>,
    /// Fingerprint of the scenario the pool was built against.
    scenario_ref: String,
}

impl CoaPool {
    pub fn new(coas: Vec<CondensedCoa>, scenario_ref: String) -> Result<Self> {
        if coas.len() < 2 {
            return Err(Error::PoolTooSmall(coas.len()));
        }
        let (na, nt) = (coas[0].n_agents(), coas[0].n_tasks());
        for c in &coas[1..] {
            if c.n_agents() != na || c.n_tasks() != nt {
                return Err(Error::DimensionMismatch(format!(
                    "pool members disagree on dimensions: {} x {} vs {} x {}",
                    na,
                    nt,
                    c.n_agents(),
                    c.n_tasks()
                )));
            }
        }
        Ok(Self { coas, scenario_ref })
    }

    pub fn coas(&self) -> &[CondensedCoa] {
        &self.coas
    }

    pub fn n_coas(&self) -> usize {
        self.coas.len()
    }

    pub fn n_agents(&self) -> usize {
        self.coas[0].n_agents()
    }

    pub fn n_tasks(&self) -> usize {
        self.coas[0].n_tasks()
    }

    pub fn scenario_ref(&self) -> &str {
        &self.scenario_ref
    }

    /// Errors unless the pool was produced against `scenario`.
    pub fn check_binding(&self, scenario: &Scenario) -> Result<()> {
        let expected = scenario.fingerprint();
        if self.scenario_ref != expected {
            return Err(Error::PoolMismatch(format!(
                "pool was built against scenario {}, got scenario {}",
                self.scenario_ref, expected
            )));
        }
        if self.n_agents() != scenario.n_agents() || self.n_tasks() != scenario.n_tasks() {
            return Err(Error::DimensionMismatch(format!(
                "pool is {} x {}, scenario has {} agents and {} tasks",
                self.n_agents(),
                self.n_tasks(),
                scenario.n_agents(),
                scenario.n_tasks()
            )));
        }
        Ok(())
    }

    /// Deliberately re-binds the pool to a variant of its scenario — e.g. one
    /// with resampled deadlines. The variant must keep the dimensions the
    /// assignments were built for.
    pub fn rebound(&self, scenario: &Scenario) -> Result<CoaPool> {
        if self.n_agents() != scenario.n_agents() || self.n_tasks() != scenario.n_tasks() {
            return Err(Error::DimensionMismatch(format!(
                "cannot rebind a {} x {} pool to a scenario with {} agents and {} tasks",
                self.n_agents(),
                self.n_tasks(),
                scenario.n_agents(),
                scenario.n_tasks()
            )));
        }
        Ok(CoaPool {
            coas: self.coas.clone(),
            scenario_ref: scenario.fingerprint(),
        })
    }
}

/// Squared L2 norm of the flattened binary-matrix difference.
///
/// For one-owner-per-column binary matrices every reassigned task toggles two
/// entries, so this equals twice the Hamming distance between the assignment
/// vectors.
pub fn pairwise_distance(a: &CondensedCoa, b: &CondensedCoa) -> Result<f64> {
    if a.n_agents() != b.n_agents() || a.n_tasks() != b.n_tasks() {
        return Err(Error::DimensionMismatch(format!(
            "cannot compare a {} x {} COA with a {} x {} COA",
            a.n_agents(),
            a.n_tasks(),
            b.n_agents(),
            b.n_tasks()
        )));
    }
    Ok(assignment_distance(a.assignment(), b.assignment()))
}

fn assignment_distance(a: &[usize], b: &[usize]) -> f64 {
    let differing = a.iter().zip(b).filter(|(x, y)| x != y).count();
    2.0 * differing as f64
}

/// Total weight of the minimum spanning tree of the complete meta-graph whose
/// nodes are the pool members and whose edge weights are [`pairwise_distance`].
pub fn diversity(pool: &CoaPool) -> Result<f64> {
    let n = pool.n_coas();
    Ok(mst_weight(n, |i, j| {
        assignment_distance(pool.coas[i].assignment(), pool.coas[j].assignment())
    }))
}

/// Prim's algorithm on a dense edge-weight closure. `n >= 2`.
fn mst_weight(n: usize, dist: impl Fn(usize, usize) -> f64) -> f64 {
    debug_assert!(n >= 2);
    let mut in_tree = vec![false; n];
    let mut best_edge = vec![f64::INFINITY; n];
    in_tree[0] = true;
    for (j, edge) in best_edge.iter_mut().enumerate().skip(1) {
        *edge = dist(0, j);
    }
    let mut total = 0.0;
    for _ in 1..n {
        let mut pick = usize::MAX;
        let mut w = f64::INFINITY;
        for j in 0..n {
            if !in_tree[j] && best_edge[j] < w {
                w = best_edge[j];
                pick = j;
            }
        }
        in_tree[pick] = true;
        total += w;
        for j in 0..n {
            if !in_tree[j] {
                let d = dist(pick, j);
                if d < best_edge[j] {
                    best_edge[j] = d;
                }
            }
        }
    }
    total
}

/// Sum over all pool members of the assigned compatibility entries: for each
/// COA, `sum_j C[assignment[j], j]`.
pub fn compatibility_score(pool: &CoaPool, compat: &CompatibilityMatrix) -> Result<f64> {
    if compat.n_agents() != pool.n_agents() || compat.n_tasks() != pool.n_tasks() {
        return Err(Error::DimensionMismatch(format!(
            "compatibility is {} x {}, pool is {} x {}",
            compat.n_agents(),
            compat.n_tasks(),
            pool.n_agents(),
            pool.n_tasks()
        )));
    }
    Ok(pool
        .coas()
        .iter()
        .map(|c| coa_compatibility(c.assignment(), compat))
        .sum())
}

fn coa_compatibility(assignment: &[usize], compat: &CompatibilityMatrix) -> f64 {
    assignment
        .iter()
        .enumerate()
        .map(|(j, &a)| compat.get(a, j))
        .sum()
}

/// Weighted pool objective:
/// `diversity_weight x diversity + compatibility_weight x compatibility_score`.
pub fn fitness(
    pool: &CoaPool,
    compat: &CompatibilityMatrix,
    diversity_weight: f64,
    compatibility_weight: f64,
) -> Result<f64> {
    Ok(diversity_weight * diversity(pool)?
        + compatibility_weight * compatibility_score(pool, compat)?)
}

/// Moves tasks off over-loaded agents until every load is at most `t_max`.
///
/// Overloaded agents (in ascending index order) shed their least-compatible
/// task to the under-capacity agent with the highest compatibility for that
/// task; all ties break toward the lower index. Tasks are only moved, never
/// dropped, so the one-owner-per-task structure is preserved. Deterministic.
pub fn repair(
    genome: &CondensedCoa,
    compat: &CompatibilityMatrix,
    t_max: usize,
) -> Result<CondensedCoa> {
    if compat.n_agents() != genome.n_agents() || compat.n_tasks() != genome.n_tasks() {
        return Err(Error::DimensionMismatch(format!(
            "compatibility is {} x {}, genome is {} x {}",
            compat.n_agents(),
            compat.n_tasks(),
            genome.n_agents(),
            genome.n_tasks()
        )));
    }
    if genome.n_agents() * t_max < genome.n_tasks() {
        return Err(Error::InvalidScenario(format!(
            "infeasible load cap: {} agents x t_max {} < {} tasks",
            genome.n_agents(),
            t_max,
            genome.n_tasks()
        )));
    }
    let mut assignment = genome.assignment().to_vec();
    repair_in_place(&mut assignment, genome.n_agents(), compat, t_max);
    CondensedCoa::new(assignment, genome.n_agents())
}

fn repair_in_place(
    assignment: &mut [usize],
    n_agents: usize,
    compat: &CompatibilityMatrix,
    t_max: usize,
) {
    let mut loads = vec![0usize; n_agents];
    for &a in assignment.iter() {
        loads[a] += 1;
    }
    for agent in 0..n_agents {
        while loads[agent] > t_max {
            // The offender's least-compatible task; ties toward the lower task id.
            let task = assignment
                .iter()
                .enumerate()
                .filter(|&(_, &a)| a == agent)
                .min_by(|&(i, _), &(j, _)| {
                    compat
                        .get(agent, i)
                        .partial_cmp(&compat.get(agent, j))
                        .unwrap_or(Ordering::Equal)
                        .then(i.cmp(&j))
                })
                .map(|(j, _)| j)
                .expect("overloaded agent owns at least one task");
            // Best under-capacity receiver for that task; ties toward the
            // lower agent id. One always exists while any agent is overloaded,
            // because total load <= n_agents * t_max.
            let receiver = (0..n_agents)
                .filter(|&b| loads[b] < t_max)
                .max_by(|&b, &c| {
                    compat
                        .get(b, task)
                        .partial_cmp(&compat.get(c, task))
                        .unwrap_or(Ordering::Equal)
                        .then(c.cmp(&b))
                })
                .expect("an under-capacity agent exists while another is overloaded");
            assignment[task] = receiver;
            loads[agent] -= 1;
            loads[receiver] += 1;
        }
    }
}

/// Hyperparameters for [`run_ga`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub population_size: usize,
    /// Per-gene probability of resampling an agent index.
    pub mutation_prob: f64,
    /// Fraction of the population copied unchanged each generation.
    /// At least one individual is always kept, so the best fitness seen is
    /// monotone non-decreasing across generations.
    pub elite_ratio: f64,
    /// Per-gene probability of inheriting from the second parent.
    pub crossover_prob: f64,
    /// Fraction of the population (fittest first) eligible as parents.
    pub parent_ratio: f64,
    /// Number of evaluated generations, counting the initial random one.
    pub iterations: usize,
    pub diversity_weight: f64,
    pub compatibility_weight: f64,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 100,
            mutation_prob: 0.1,
            elite_ratio: 0.01,
            crossover_prob: 0.5,
            parent_ratio: 0.3,
            iterations: 5000,
            diversity_weight: 1.0,
            compatibility_weight: 1.0,
            seed: 0,
        }
    }
}

impl GaConfig {
    fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::InvalidConfig(format!(
                "population_size must be at least 2, got {}",
                self.population_size
            )));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidConfig("iterations must be at least 1".into()));
        }
        for (name, p) in [
            ("mutation_prob", self.mutation_prob),
            ("elite_ratio", self.elite_ratio),
            ("crossover_prob", self.crossover_prob),
            ("parent_ratio", self.parent_ratio),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must lie in [0, 1], got {p}"
                )));
            }
        }
        for (name, w) in [
            ("diversity_weight", self.diversity_weight),
            ("compatibility_weight", self.compatibility_weight),
        ] {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be finite and non-negative, got {w}"
                )));
            }
        }
        Ok(())
    }

    fn elite_count(&self) -> usize {
        ((self.elite_ratio * self.population_size as f64) as usize).clamp(1, self.population_size)
    }

    fn parent_count(&self) -> usize {
        ((self.parent_ratio * self.population_size as f64).ceil() as usize)
            .clamp(2.min(self.population_size), self.population_size)
    }
}

/// Best-individual statistics for one generation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best_fitness: f64,
    /// Weighted diversity term of the best individual.
    pub diversity_term: f64,
    /// Weighted compatibility term of the best individual.
    pub compatibility_term: f64,
}

/// Per-generation best-fitness trace of a GA run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FitnessHistory {
    pub generations: Vec<GenerationStats>,
}

impl FitnessHistory {
    /// True when best fitness never decreases generation over generation.
    pub fn is_monotone(&self) -> bool {
        self.generations
            .windows(2)
            .all(|w| w[1].best_fitness >= w[0].best_fitness)
    }

    /// CSV with columns `generation,best_fitness,diversity_term,compatibility_term`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("generation,best_fitness,diversity_term,compatibility_term\n");
        for row in &self.generations {
            out.push_str(&format!(
                "{},{},{},{}\n",
                row.generation, row.best_fitness, row.diversity_term, row.compatibility_term
            ));
        }
        out
    }
}

/// Result of a GA run: the best pool ever seen plus its trace.
#[derive(Debug, Clone, PartialEq)]
pub struct GaOutcome {
    pub pool: CoaPool,
    pub history: FitnessHistory,
    pub best_fitness: f64,
    /// Unweighted diversity of the returned pool.
    pub diversity: f64,
    /// Unweighted compatibility of the returned pool.
    pub compatibility: f64,
    /// Highest unweighted diversity among the initial random population,
    /// the baseline the evolved pool is compared against.
    pub initial_best_diversity: f64,
}

struct Individual {
    genome: Vec<usize>,
    fitness: f64,
    diversity: f64,
    compatibility: f64,
}

/// Evolves a pool of `n_coa` COAs against `scenario` with an elitist GA.
///
/// The genome is the whole pool (`n_coa * n_task` agent indices), since the
/// diversity term couples all members. Every variation step is followed by
/// [`repair`], so each individual in every generation satisfies the load cap.
/// The run is bit-deterministic for a fixed seed and config: all randomness
/// comes from per-individual streams split from `config.seed`, so parallel
/// and serial execution agree.
pub fn run_ga(scenario: &Scenario, n_coa: usize, config: &GaConfig) -> Result<GaOutcome> {
    config.validate()?;
    if n_coa < 2 {
        return Err(Error::PoolTooSmall(n_coa));
    }
    let compat = scenario.compat();
    let n_agents = scenario.n_agents();
    let n_tasks = scenario.n_tasks();
    let t_max = scenario.t_max();
    let n_genes = n_coa * n_tasks;

    let evaluate = |genome: Vec<usize>| -> Individual {
        let div = mst_weight(n_coa, |i, j| {
            assignment_distance(
                &genome[i * n_tasks..(i + 1) * n_tasks],
                &genome[j * n_tasks..(j + 1) * n_tasks],
            )
        });
        let comp: f64 = genome
            .chunks(n_tasks)
            .map(|chunk| coa_compatibility(chunk, compat))
            .sum();
        Individual {
            fitness: config.diversity_weight * div + config.compatibility_weight * comp,
            diversity: div,
            compatibility: comp,
            genome,
        }
    };

    let init_seed = labeled_seed(config.seed, "ga-init");
    let mut population: Vec<Individual> = (0..config.population_size)
        .into_par_iter()
        .map(|slot| {
            let mut rng = ChaCha8Rng::seed_from_u64(indexed_seed(init_seed, 0, slot as u64));
            let mut genome: Vec<usize> = (0..n_genes)
                .map(|_| rng.random_range(0..n_agents))
                .collect();
            for chunk in genome.chunks_mut(n_tasks) {
                repair_in_place(chunk, n_agents, compat, t_max);
            }
            evaluate(genome)
        })
        .collect();
    sort_by_fitness(&mut population);

    let initial_best_diversity = population
        .iter()
        .map(|ind| ind.diversity)
        .fold(f64::NEG_INFINITY, f64::max);

    let mut history = FitnessHistory::default();
    record(&mut history, 0, &population[0], config);

    let elite_count = config.elite_count();
    let parent_count = config.parent_count();
    let var_seed = labeled_seed(config.seed, "ga-var");

    for generation in 1..config.iterations {
        let offspring: Vec<Individual> = (elite_count..config.population_size)
            .into_par_iter()
            .map(|slot| {
                let mut rng = ChaCha8Rng::seed_from_u64(indexed_seed(
                    var_seed,
                    generation as u64,
                    slot as u64,
                ));
                let pa = tournament(&mut rng, &population, parent_count);
                let pb = tournament(&mut rng, &population, parent_count);
                let mut genome = population[pa].genome.clone();
                let other = &population[pb].genome;
                for (g, gene) in genome.iter_mut().enumerate() {
                    if rng.random_bool(config.crossover_prob) {
                        *gene = other[g];
                    }
                }
                for gene in genome.iter_mut() {
                    if rng.random_bool(config.mutation_prob) {
                        *gene = rng.random_range(0..n_agents);
                    }
                }
                for chunk in genome.chunks_mut(n_tasks) {
                    repair_in_place(chunk, n_agents, compat, t_max);
                }
                evaluate(genome)
            })
            .collect();

        let mut next: Vec<Individual> = population.drain(..elite_count).collect();
        next.extend(offspring);
        population = next;
        sort_by_fitness(&mut population);
        record(&mut history, generation, &population[0], config);
    }

    let best = &population[0];
    let coas = best
        .genome
        .chunks(n_tasks)
        .map(|chunk| CondensedCoa::new(chunk.to_vec(), n_agents))
        .collect::<Result<Vec<_>>>()?;
    Ok(GaOutcome {
        pool: CoaPool::new(coas, scenario.fingerprint())?,
        best_fitness: best.fitness,
        diversity: best.diversity,
        compatibility: best.compatibility,
        history,
        initial_best_diversity,
    })
}

/// Fittest first; equal fitness preserves prior order (stable sort), keeping
/// runs deterministic.
fn sort_by_fitness(population: &mut [Individual]) {
    population.sort_by(|a, b| b.fitness.partial_cmp(&a.fitness).unwrap_or(Ordering::Equal));
}

/// Size-2 tournament over the `parent_count` fittest; returns the population
/// index of the winner. Ties go to the better-ranked (lower) index.
fn tournament(rng: &mut ChaCha8Rng, population: &[Individual], parent_count: usize) -> usize {
    let i = rng.random_range(0..parent_count);
    let j = rng.random_range(0..parent_count);
    match population[i].fitness.partial_cmp(&population[j].fitness) {
        Some(Ordering::Less) => j,
        Some(Ordering::Greater) => i,
        _ => i.min(j),
    }
}

fn record(history: &mut FitnessHistory, generation: usize, best: &Individual, config: &GaConfig) {
    history.generations.push(GenerationStats {
        generation,
        best_fitness: best.fitness,
        diversity_term: config.diversity_weight * best.diversity,
        compatibility_term: config.compatibility_weight * best.compatibility,
    });
}

// --- pool file format ------------------------------------------------------

/// On-disk form of an evolved pool, including the metrics and config that
/// produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolRecord {
    pub schema_version: u32,
    pub n_coa: usize,
    pub n_ag: usize,
    pub n_task: usize,
    /// `assignments[k][j]` = agent owning task `j` in COA `k`.
    pub assignments: Vec<Vec<usize>>,
    pub fitness: f64,
    pub diversity: f64,
    pub compatibility: f64,
    pub config: GaConfig,
    pub scenario_ref: String,
}

impl PoolRecord {
    pub fn from_outcome(outcome: &GaOutcome, config: &GaConfig) -> Self {
        Self {
            schema_version: crate::scenario::SCHEMA_VERSION,
            n_coa: outcome.pool.n_coas(),
            n_ag: outcome.pool.n_agents(),
            n_task: outcome.pool.n_tasks(),
            assignments: outcome
                .pool
                .coas()
                .iter()
                .map(|c| c.assignment().to_vec())
                .collect(),
            fitness: outcome.best_fitness,
            diversity: outcome.diversity,
            compatibility: outcome.compatibility,
            config: config.clone(),
            scenario_ref: outcome.pool.scenario_ref().to_string(),
        }
    }

    pub fn to_pool(&self) -> Result<CoaPool> {
        if self.assignments.len() != self.n_coa {
            return Err(Error::DimensionMismatch(format!(
                "pool file declares {} COAs but holds {} assignments",
                self.n_coa,
                self.assignments.len()
            )));
        }
        let coas = self
            .assignments
            .iter()
            .map(|a| {
                if a.len() != self.n_task {
                    return Err(Error::DimensionMismatch(format!(
                        "pool file declares {} tasks but an assignment holds {}",
                        self.n_task,
                        a.len()
                    )));
                }
                CondensedCoa::new(a.clone(), self.n_ag)
            })
            .collect::<Result<Vec<_>>>()?;
        CoaPool::new(coas, self.scenario_ref.clone())
    }
}

pub fn save_pool(record: &PoolRecord, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(record).expect("pool serialization cannot fail");
    std::fs::write(path, text).map_err(|source| Error::Io {
        action: "write",
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_pool(path: &Path) -> Result<PoolRecord> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        action: "read",
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| Error::Parse {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{sample_scenario, SampleConfig};
    use proptest::prelude::*;

    fn coa(assignment: &[usize], n_agents: usize) -> CondensedCoa {
        CondensedCoa::new(assignment.to_vec(), n_agents).unwrap()
    }

    fn pool(assignments: &[&[usize]], n_agents: usize) -> CoaPool {
        CoaPool::new(
            assignments.iter().map(|a| coa(a, n_agents)).collect(),
            "test".into(),
        )
        .unwrap()
    }

    fn uniform_compat(n_agents: usize, n_tasks: usize, value: f64) -> CompatibilityMatrix {
        CompatibilityMatrix::new(n_agents, n_tasks, vec![value; n_agents * n_tasks]).unwrap()
    }

    #[test]
    fn distance_of_identical_is_zero() {
        let a = coa(&[0, 1, 2, 0], 3);
        assert_eq!(pairwise_distance(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn distance_of_single_reassignment_is_two() {
        let a = coa(&[0, 1, 2, 0], 3);
        let b = coa(&[0, 1, 2, 1], 3);
        assert_eq!(pairwise_distance(&a, &b).unwrap(), 2.0);
    }

    #[test]
    fn distance_matches_hand_expanded_matrices() {
        let a = coa(&[0, 0, 1, 2], 3);
        let b = coa(&[1, 2, 1, 2], 3);
        assert_eq!(pairwise_distance(&a, &b).unwrap(), 4.0);
    }

    #[test]
    fn distance_rejects_dimension_mismatch() {
        let a = coa(&[0, 1], 2);
        let b = coa(&[0, 1, 0], 2);
        assert!(matches!(
            pairwise_distance(&a, &b),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn diversity_of_identical_pool_is_zero() {
        let row: &[usize] = &[0, 1, 0];
        let p = pool(&[row; 5], 2);
        assert_eq!(diversity(&p).unwrap(), 0.0);
    }

    #[test]
    fn diversity_of_pair_is_their_distance() {
        let p = pool(&[&[0, 0, 0, 0], &[1, 1, 0, 0]], 2);
        assert_eq!(diversity(&p).unwrap(), 4.0);
    }

    #[test]
    fn diversity_picks_cheapest_spanning_edges() {
        // pairwise distances: d(a,b)=2, d(a,c)=4, d(b,c)=6; MST = 2 + 4
        let p = pool(&[&[0, 0, 0], &[1, 0, 0], &[0, 1, 1]], 2);
        assert_eq!(diversity(&p).unwrap(), 6.0);
    }

    #[test]
    fn diversity_is_permutation_invariant() {
        let p1 = pool(&[&[0, 0, 0], &[1, 0, 0], &[0, 1, 1]], 2);
        let p2 = pool(&[&[0, 1, 1], &[0, 0, 0], &[1, 0, 0]], 2);
        assert_eq!(diversity(&p1).unwrap(), diversity(&p2).unwrap());
    }

    #[test]
    fn pool_rejects_single_member() {
        let err = CoaPool::new(vec![coa(&[0, 1], 2)], "x".into()).unwrap_err();
        assert!(matches!(err, Error::PoolTooSmall(1)));
    }

    #[test]
    fn compatibility_of_all_ones_counts_assignments() {
        let p = pool(&[&[0, 1, 0, 1], &[1, 1, 1, 1]], 2);
        let c = uniform_compat(2, 4, 1.0);
        assert_eq!(compatibility_score(&p, &c).unwrap(), 8.0);
    }

    #[test]
    fn compatibility_of_constant_half_matrix() {
        let assignments: Vec<Vec<usize>> = (0..4).map(|k| vec![k % 2; 10]).collect();
        let p = CoaPool::new(
            assignments.iter().map(|a| coa(a, 2)).collect(),
            "test".into(),
        )
        .unwrap();
        let c = uniform_compat(2, 10, 0.5);
        assert_eq!(compatibility_score(&p, &c).unwrap(), 20.0);
    }

    #[test]
    fn compatibility_sums_selected_entries() {
        let c = CompatibilityMatrix::new(2, 2, vec![1.0, 0.2, 0.4, 0.9]).unwrap();
        let p = pool(&[&[0, 1], &[0, 1]], 2);
        // each COA contributes C[0][0] + C[1][1] = 1.9
        assert_eq!(compatibility_score(&p, &c).unwrap(), 3.8);
    }

    #[test]
    fn fitness_degenerate_weights() {
        let p = pool(&[&[0, 0, 0], &[1, 0, 0], &[0, 1, 1]], 2);
        let c = uniform_compat(2, 3, 0.5);
        let d = diversity(&p).unwrap();
        let s = compatibility_score(&p, &c).unwrap();
        assert_eq!(fitness(&p, &c, 1.0, 0.0).unwrap(), d);
        assert_eq!(fitness(&p, &c, 0.0, 1.0).unwrap(), s);
        assert_eq!(fitness(&p, &c, 1.0, 1.0).unwrap(), d + s);
    }

    #[test]
    fn fitness_of_identical_pool_with_unit_compat() {
        let row: &[usize] = &[0, 1, 0, 1, 0];
        let p = pool(&[row; 3], 2);
        let c = uniform_compat(2, 5, 1.0);
        assert_eq!(fitness(&p, &c, 1.0, 1.0).unwrap(), 15.0);
    }

    #[test]
    fn repair_keeps_feasible_genome_unchanged() {
        let g = coa(&[0, 1, 0, 1], 2);
        let c = uniform_compat(2, 4, 0.5);
        assert_eq!(repair(&g, &c, 2).unwrap(), g);
    }

    #[test]
    fn repair_sheds_least_compatible_task_to_best_receiver() {
        // agent 0 owns tasks 0..3 with compat 0.9, 0.2, 0.8, and t_max = 2:
        // it sheds task 1, which lands on agent 1 (the only receiver).
        let c =
            CompatibilityMatrix::new(2, 4, vec![0.9, 0.2, 0.8, 0.5, 0.3, 0.7, 0.4, 0.6]).unwrap();
        let g = coa(&[0, 0, 0, 1], 2);
        let repaired = repair(&g, &c, 2).unwrap();
        assert_eq!(repaired.assignment(), &[0, 1, 0, 1]);
        assert_eq!(repaired.loads(), vec![2, 2]);
    }

    #[test]
    fn repair_performs_exactly_overflow_many_moves() {
        let n_tasks = 9;
        let c = uniform_compat(3, n_tasks, 0.5);
        let g = coa(&vec![0; n_tasks], 3);
        let repaired = repair(&g, &c, 4).unwrap();
        let moved = g
            .assignment()
            .iter()
            .zip(repaired.assignment())
            .filter(|(a, b)| a != b)
            .count();
        assert_eq!(moved, 5); // load 9 -> cap 4
        assert!(repaired.loads().iter().all(|&l| l <= 4));
    }

    #[test]
    fn repair_rejects_infeasible_cap() {
        let c = uniform_compat(2, 10, 0.5);
        let g = coa(&[0; 10], 2);
        assert!(matches!(repair(&g, &c, 4), Err(Error::InvalidScenario(_))));
    }

    #[test]
    fn ga_degenerate_run_returns_better_of_two() {
        let scenario = sample_scenario(&SampleConfig::new(6, 2, 3)).unwrap();
        let config = GaConfig {
            population_size: 2,
            iterations: 1,
            seed: 9,
            ..GaConfig::default()
        };
        let out = run_ga(&scenario, 3, &config).unwrap();
        assert_eq!(out.history.generations.len(), 1);
        assert_eq!(out.history.generations[0].best_fitness, out.best_fitness);
        let f = fitness(&out.pool, scenario.compat(), 1.0, 1.0).unwrap();
        assert!((f - out.best_fitness).abs() < 1e-12);
    }

    #[test]
    fn ga_is_deterministic() {
        let scenario = sample_scenario(&SampleConfig::new(10, 2, 5)).unwrap();
        let config = GaConfig {
            population_size: 20,
            iterations: 15,
            seed: 42,
            ..GaConfig::default()
        };
        let a = run_ga(&scenario, 4, &config).unwrap();
        let b = run_ga(&scenario, 4, &config).unwrap();
        assert_eq!(a.pool, b.pool);
        assert_eq!(a.history, b.history);
    }

    #[test]
    fn ga_history_is_monotone() {
        let scenario = sample_scenario(&SampleConfig::new(12, 3, 8)).unwrap();
        let config = GaConfig {
            population_size: 30,
            iterations: 40,
            seed: 4,
            ..GaConfig::default()
        };
        let out = run_ga(&scenario, 4, &config).unwrap();
        assert!(out.history.is_monotone());
        assert_eq!(out.history.generations.len(), 40);
    }

    #[test]
    fn ga_improves_diversity_over_initial_best() {
        let scenario = sample_scenario(&SampleConfig::new(20, 2, 1)).unwrap();
        let config = GaConfig {
            iterations: 120,
            seed: 7,
            ..GaConfig::default()
        };
        let out = run_ga(&scenario, 5, &config).unwrap();
        assert!(
            out.diversity > out.initial_best_diversity,
            "evolved diversity {} should beat initial best {}",
            out.diversity,
            out.initial_best_diversity
        );
    }

    #[test]
    fn ga_pools_satisfy_load_cap() {
        let scenario = sample_scenario(&SampleConfig::new(15, 3, 2)).unwrap();
        let config = GaConfig {
            population_size: 16,
            iterations: 10,
            seed: 11,
            ..GaConfig::default()
        };
        let out = run_ga(&scenario, 5, &config).unwrap();
        for c in out.pool.coas() {
            assert!(c.loads().iter().all(|&l| l <= scenario.t_max()));
        }
    }

    #[test]
    fn pool_record_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pool.json");
        let scenario = sample_scenario(&SampleConfig::new(8, 2, 6)).unwrap();
        let config = GaConfig {
            population_size: 8,
            iterations: 5,
            seed: 1,
            ..GaConfig::default()
        };
        let out = run_ga(&scenario, 3, &config).unwrap();
        let record = PoolRecord::from_outcome(&out, &config);
        save_pool(&record, &path).unwrap();
        let loaded = load_pool(&path).unwrap();
        assert_eq!(record, loaded);
        assert_eq!(loaded.to_pool().unwrap(), out.pool);
        loaded.to_pool().unwrap().check_binding(&scenario).unwrap();
    }

    #[test]
    fn binding_check_rejects_foreign_scenario() {
        let s1 = sample_scenario(&SampleConfig::new(8, 2, 6)).unwrap();
        let s2 = sample_scenario(&SampleConfig::new(8, 2, 7)).unwrap();
        let config = GaConfig {
            population_size: 8,
            iterations: 2,
            seed: 1,
            ..GaConfig::default()
        };
        let out = run_ga(&s1, 3, &config).unwrap();
        assert!(matches!(
            out.pool.check_binding(&s2),
            Err(Error::PoolMismatch(_))
        ));
    }

    /// Exhaustive minimum spanning tree weight for small graphs, enumerating
    /// every labeled tree through its sequence encoding.
    fn brute_force_mst(n: usize, d: &dyn Fn(usize, usize) -> f64) -> f64 {
        let len = n - 2;
        let mut seq = vec![0usize; len];
        let mut best = f64::INFINITY;
        loop {
            let mut deg = vec![1usize; n];
            for &s in &seq {
                deg[s] += 1;
            }
            let mut weight = 0.0;
            for &s in &seq {
                let leaf = (0..n).find(|&v| deg[v] == 1).unwrap();
                weight += d(leaf, s);
                deg[leaf] = 0;
                deg[s] -= 1;
            }
            let ends: Vec<usize> = (0..n).filter(|&v| deg[v] == 1).collect();
            weight += d(ends[0], ends[1]);
            best = best.min(weight);

            let mut i = 0;
            loop {
                if i == len {
                    return best;
                }
                seq[i] += 1;
                if seq[i] < n {
                    break;
                }
                seq[i] = 0;
                i += 1;
            }
        }
    }

    #[test]
    fn mst_matches_exhaustive_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for case in 0..25 {
            let n_coas = 2 + case % 5; // 2..=6
            let n_agents = 2 + case % 3;
            let n_tasks = 3 + case % 4;
            let coas: Vec<CondensedCoa> = (0..n_coas)
                .map(|_| {
                    coa(
                        &(0..n_tasks)
                            .map(|_| rng.random_range(0..n_agents))
                            .collect::<Vec<_>>(),
                        n_agents,
                    )
                })
                .collect();
            let p = CoaPool::new(coas, "test".into()).unwrap();
            let d = |i: usize, j: usize| {
                assignment_distance(p.coas()[i].assignment(), p.coas()[j].assignment())
            };
            let expected = brute_force_mst(n_coas, &d);
            let got = diversity(&p).unwrap();
            assert!(
                (got - expected).abs() < 1e-9,
                "case {case}: prim {got} vs brute force {expected}"
            );
        }
    }

    proptest! {
        /// Flatten-and-square on explicit binary matrices agrees with the
        /// assignment-level shortcut.
        #[test]
        fn distance_equals_flattened_matrix_norm(
            pair in (2usize..5, 1usize..10).prop_flat_map(|(na, nt)| {
                (
                    proptest::collection::vec(0..na, nt),
                    proptest::collection::vec(0..na, nt),
                    Just(na),
                )
            })
        ) {
            let (a, b, na) = pair;
            let ca = coa(&a, na);
            let cb = coa(&b, na);
            let ma = ca.binary_matrix();
            let mb = cb.binary_matrix();
            let squared: f64 = ma.iter().flatten().zip(mb.iter().flatten())
                .map(|(&x, &y)| {
                    let d = f64::from(x) - f64::from(y);
                    d * d
                })
                .sum();
            prop_assert_eq!(pairwise_distance(&ca, &cb).unwrap(), squared);
        }

        /// Distance is a symmetric, non-negative metric-like quantity.
        #[test]
        fn distance_is_symmetric(
            pair in (2usize..5, 1usize..10).prop_flat_map(|(na, nt)| {
                (
                    proptest::collection::vec(0..na, nt),
                    proptest::collection::vec(0..na, nt),
                    Just(na),
                )
            })
        ) {
            let (a, b, na) = pair;
            let ca = coa(&a, na);
            let cb = coa(&b, na);
            let ab = pairwise_distance(&ca, &cb).unwrap();
            let ba = pairwise_distance(&cb, &ca).unwrap();
            prop_assert_eq!(ab, ba);
            prop_assert!(ab >= 0.0);
            prop_assert_eq!(ab == 0.0, a == b);
        }

        /// Repair always lands within the load cap and never drops a task.
        #[test]
        fn repair_enforces_cap(
            seed in 0u64..5000,
            n_agents in 2usize..5,
            n_tasks in 1usize..20,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t_max = n_tasks / n_agents + 1 + (seed % 3) as usize;
            let genome = coa(
                &(0..n_tasks).map(|_| rng.random_range(0..n_agents)).collect::<Vec<_>>(),
                n_agents,
            );
            let values: Vec<f64> = (0..n_agents * n_tasks)
                .map(|_| rng.random_range(0.01..=1.0))
                .collect();
            let compat = CompatibilityMatrix::new(n_agents, n_tasks, values).unwrap();
            let repaired = repair(&genome, &compat, t_max).unwrap();
            prop_assert!(repaired.loads().iter().all(|&l| l <= t_max));
            prop_assert_eq!(repaired.n_tasks(), n_tasks);
            // every task still has exactly one owner, by construction
            prop_assert!(repaired.assignment().iter().all(|&a| a < n_agents));
        }
    }
}
