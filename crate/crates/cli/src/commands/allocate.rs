use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use serde_json::json;

use coaplan_core::seed::labeled_seed;
use coaplan_core::{auto_t_max, load_scenario, run_ga, save_pool, GaConfig, PoolRecord};

use crate::args::{parse_coas, parse_prob, parse_tmax, parse_weight, TmaxArg};
use crate::error::Result;
use crate::manifest::{self, RunManifest, SCHEMA_VERSION, TOOL, VERSION};

use super::gen_scenario::tmax_value;
use super::{ensure_out_dir, path_str, write_text, Global};

#[derive(Debug, Args)]
pub struct AllocateArgs {
    /// Scenario JSON produced by gen-scenario.
    #[arg(long)]
    pub scenario: PathBuf,

    /// Pool size; diversity needs at least 2 COAs.
    #[arg(long, value_parser = parse_coas)]
    pub coas: usize,

    /// GA generations, counting the initial random one.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..), default_value_t = 5000)]
    pub iterations: u64,

    /// GA population size.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..), default_value_t = 100)]
    pub population: u64,

    /// Per-gene mutation probability.
    #[arg(long, value_parser = parse_prob, default_value_t = 0.1)]
    pub mutation: f64,

    /// Population fraction copied unchanged each generation.
    #[arg(long, value_parser = parse_prob, default_value_t = 0.01)]
    pub elite: f64,

    /// Per-gene probability of inheriting from the second parent.
    #[arg(long, value_parser = parse_prob, default_value_t = 0.5)]
    pub crossover: f64,

    /// Fittest population fraction eligible as parents.
    #[arg(long, value_parser = parse_prob, default_value_t = 0.3)]
    pub parent_ratio: f64,

    /// Weight of the pool-diversity fitness term.
    #[arg(long, value_parser = parse_weight, default_value_t = 1.0)]
    pub diversity_weight: f64,

    /// Weight of the summed-compatibility fitness term.
    #[arg(long, value_parser = parse_weight, default_value_t = 1.0)]
    pub compatibility_weight: f64,

    /// Override the scenario's per-agent cap: a number, or `auto` to
    /// recompute floor(tasks/agents) + 10.
    #[arg(long, value_parser = parse_tmax)]
    pub tmax: Option<TmaxArg>,

    /// Artifact base name inside --out-dir.
    #[arg(long, default_value = "pool")]
    pub name: String,
}

pub fn run(global: &Global, args: &AllocateArgs) -> Result<()> {
    let started = Instant::now();
    let scenario = load_scenario(&args.scenario)?;
    let scenario = match args.tmax {
        None => scenario,
        Some(TmaxArg::Auto) => {
            scenario.with_t_max(auto_t_max(scenario.n_tasks(), scenario.n_agents()))?
        }
        Some(TmaxArg::Fixed(n)) => scenario.with_t_max(n)?,
    };
    let config = GaConfig {
        population_size: args.population as usize,
        mutation_prob: args.mutation,
        elite_ratio: args.elite,
        crossover_prob: args.crossover,
        parent_ratio: args.parent_ratio,
        iterations: args.iterations as usize,
        diversity_weight: args.diversity_weight,
        compatibility_weight: args.compatibility_weight,
        seed: labeled_seed(global.seed, "ga"),
    };
    let outcome = run_ga(&scenario, args.coas, &config)?;

    ensure_out_dir(&global.out_dir)?;
    let pool_path = global.out_dir.join(format!("{}.pool.json", args.name));
    save_pool(&PoolRecord::from_outcome(&outcome, &config), &pool_path)?;
    let fitness_path = global.out_dir.join(format!("{}.fitness.csv", args.name));
    write_text(&fitness_path, &outcome.history.to_csv())?;

    println!("t_max = {}", scenario.t_max());
    println!(
        "best fitness {} after {} generations (diversity {}, compatibility {})",
        outcome.best_fitness, args.iterations, outcome.diversity, outcome.compatibility
    );
    if outcome.initial_best_diversity > 0.0 {
        println!(
            "diversity gain over best initial individual: {:.2}%",
            (outcome.diversity / outcome.initial_best_diversity - 1.0) * 100.0
        );
    }
    println!(
        "wrote {} and {}",
        pool_path.display(),
        fitness_path.display()
    );

    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        tool: TOOL,
        version: VERSION,
        command: "allocate",
        args: json!({
            "scenario": path_str(&args.scenario),
            "coas": args.coas,
            "iterations": args.iterations,
            "population": args.population,
            "mutation": args.mutation,
            "elite": args.elite,
            "crossover": args.crossover,
            "parent_ratio": args.parent_ratio,
            "diversity_weight": args.diversity_weight,
            "compatibility_weight": args.compatibility_weight,
            "tmax": args.tmax.map(tmax_value),
            "t_max_effective": scenario.t_max(),
            "name": args.name,
        }),
        seed: global.seed,
        sub_seeds: manifest::sub_seeds(global.seed),
        inputs: vec![path_str(&args.scenario)],
        outputs: vec![path_str(&pool_path), path_str(&fitness_path)],
        duration_seconds: started.elapsed().as_secs_f64(),
    };
    manifest::write(&global.out_dir, &args.name, &manifest)?;
    Ok(())
}
