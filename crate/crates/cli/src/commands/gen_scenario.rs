use std::time::Instant;

use clap::Args;
use serde_json::json;

use coaplan_core::seed::labeled_seed;
use coaplan_core::{sample_scenario, save_scenario, SampleConfig};

use crate::args::{parse_c_min, parse_deadline_range, parse_positive, parse_tmax, TmaxArg};
use crate::error::Result;
use crate::manifest::{self, RunManifest, SCHEMA_VERSION, TOOL, VERSION};

use super::{ensure_out_dir, path_str, Global};

#[derive(Debug, Args)]
pub struct GenScenarioArgs {
    /// Number of tasks to sample.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub tasks: u64,

    /// Number of agents.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub agents: u64,

    /// Mission area edge length in meters; positions are uniform in the square.
    #[arg(long, value_parser = parse_positive, default_value_t = 1000.0)]
    pub area: f64,

    /// Deadline sampling range in seconds, as `lo:hi`.
    #[arg(long, value_parser = parse_deadline_range, default_value = "500:50000")]
    pub deadline_range: (f64, f64),

    /// Shared agent speed in meters per second.
    #[arg(long, value_parser = parse_positive, default_value_t = 1.0)]
    pub velocity: f64,

    /// Lower clamp for sampled compatibility entries, in (0, 1].
    #[arg(long, value_parser = parse_c_min, default_value_t = 0.01)]
    pub c_min: f64,

    /// Per-agent task cap: a number, or `auto` for floor(tasks/agents) + 10.
    #[arg(long, value_parser = parse_tmax, default_value = "auto")]
    pub tmax: TmaxArg,

    /// Number of task category labels.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..), default_value_t = 5)]
    pub categories: u8,

    /// Artifact base name inside --out-dir.
    #[arg(long, default_value = "scenario")]
    pub name: String,
}

pub fn run(global: &Global, args: &GenScenarioArgs) -> Result<()> {
    let started = Instant::now();
    let config = SampleConfig {
        n_tasks: args.tasks as usize,
        n_agents: args.agents as usize,
        area: args.area,
        deadline_range: args.deadline_range,
        velocity: args.velocity,
        c_min: args.c_min,
        t_max: match args.tmax {
            TmaxArg::Auto => None,
            TmaxArg::Fixed(n) => Some(n),
        },
        categories: args.categories,
        seed: labeled_seed(global.seed, "scenario"),
    };
    let scenario = sample_scenario(&config)?;

    ensure_out_dir(&global.out_dir)?;
    let path = global.out_dir.join(format!("{}.scenario.json", args.name));
    save_scenario(&scenario, &path)?;
    println!(
        "wrote {} ({} tasks, {} agents, t_max = {}, fingerprint {})",
        path.display(),
        scenario.n_tasks(),
        scenario.n_agents(),
        scenario.t_max(),
        scenario.fingerprint()
    );

    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        tool: TOOL,
        version: VERSION,
        command: "gen-scenario",
        args: json!({
            "tasks": args.tasks,
            "agents": args.agents,
            "area": args.area,
            "deadline_range": [args.deadline_range.0, args.deadline_range.1],
            "velocity": args.velocity,
            "c_min": args.c_min,
            "tmax": tmax_value(args.tmax),
            "t_max_effective": scenario.t_max(),
            "categories": args.categories,
            "name": args.name,
        }),
        seed: global.seed,
        sub_seeds: manifest::sub_seeds(global.seed),
        inputs: Vec::new(),
        outputs: vec![path_str(&path)],
        duration_seconds: started.elapsed().as_secs_f64(),
    };
    manifest::write(&global.out_dir, &args.name, &manifest)?;
    Ok(())
}

pub fn tmax_value(tmax: TmaxArg) -> serde_json::Value {
    match tmax {
        TmaxArg::Auto => json!("auto"),
        TmaxArg::Fixed(n) => json!(n),
    }
}
