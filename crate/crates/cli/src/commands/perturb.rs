use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, ValueEnum};
use serde_json::json;

use coaplan_core::seed::{indexed_seed, labeled_seed};
use coaplan_core::{
    assemble_pool, load_pool, load_scenario, removal_points_csv, removal_sweep, rerank_under_noise,
    transition_matrices_csv, NominalTravel, PolicyKind, TransitionMatrix, DEFAULT_ORACLE_LIMIT,
};

use crate::args::{parse_levels, parse_policy, parse_sweep, Levels, Sweep};
use crate::error::Result;
use crate::manifest::{self, RunManifest, SCHEMA_VERSION, TOOL, VERSION};

use super::{ensure_out_dir, path_str, warn_fallbacks, write_text, Global};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PerturbMode {
    /// Inflate travel times on randomly selected edges and track quartile
    /// transitions of the re-ranked pool.
    Noise,
    /// Remove randomly selected edges and count COAs whose planned
    /// trajectories survive.
    Removal,
}

impl PerturbMode {
    fn as_str(self) -> &'static str {
        match self {
            PerturbMode::Noise => "noise",
            PerturbMode::Removal => "removal",
        }
    }
}

#[derive(Debug, Args)]
pub struct PerturbArgs {
    /// Scenario JSON produced by gen-scenario.
    #[arg(long)]
    pub scenario: PathBuf,

    /// Pool JSON produced by allocate.
    #[arg(long)]
    pub pool: PathBuf,

    #[arg(long, value_enum)]
    pub mode: PerturbMode,

    /// Sequencing policy used to assemble trajectories.
    #[arg(long, value_parser = parse_policy, default_value = "greedy")]
    pub policy: PolicyKind,

    /// Noise levels as comma-separated percentages (noise mode).
    #[arg(long, value_parser = parse_levels, default_value = "5,10,15,20")]
    pub levels: Levels,

    /// Removal percentages as an inclusive `start:end:step` sweep (removal mode).
    #[arg(long, value_parser = parse_sweep, default_value = "0:10:1")]
    pub sweep: Sweep,

    /// Independent perturbation seeds to run; noise mode also writes the
    /// matrices averaged across them.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..), default_value_t = 1)]
    pub repetitions: u64,

    /// Largest assignment the exact policy sequences before falling back to greedy.
    #[arg(long, default_value_t = DEFAULT_ORACLE_LIMIT)]
    pub oracle_limit: usize,

    /// Artifact base name inside --out-dir.
    #[arg(long, default_value = "perturb")]
    pub name: String,
}

pub fn run(global: &Global, args: &PerturbArgs) -> Result<()> {
    let started = Instant::now();
    let scenario = load_scenario(&args.scenario)?;
    let pool = load_pool(&args.pool)?.to_pool()?;
    let perturb_seed = labeled_seed(global.seed, "perturb");
    ensure_out_dir(&global.out_dir)?;

    let outputs = match args.mode {
        PerturbMode::Noise => {
            // Each repetition is one self-contained experiment under its own
            // derived seed; the averaged matrices summarize the batch.
            let mut per_rep: Vec<Vec<(f64, TransitionMatrix)>> = Vec::new();
            for rep in 0..args.repetitions {
                let analysis = rerank_under_noise(
                    &pool,
                    &scenario,
                    &args.levels.0,
                    args.policy,
                    indexed_seed(perturb_seed, rep, 0),
                    args.oracle_limit,
                )?;
                if rep == 0 {
                    warn_fallbacks(&analysis.fallbacks);
                }
                per_rep.push(
                    analysis
                        .levels
                        .iter()
                        .map(|l| (l.lambda_percent, l.transition))
                        .collect(),
                );
            }

            let mut outputs = Vec::new();
            if args.repetitions == 1 {
                let path = global
                    .out_dir
                    .join(format!("{}.transitions.csv", args.name));
                write_text(&path, &transition_matrices_csv(&per_rep[0]))?;
                println!("wrote {}", path.display());
                outputs.push(path_str(&path));
            } else {
                for (rep, rows) in per_rep.iter().enumerate() {
                    let path = global
                        .out_dir
                        .join(format!("{}.transitions.rep{rep}.csv", args.name));
                    write_text(&path, &transition_matrices_csv(rows))?;
                    outputs.push(path_str(&path));
                }
                let mean_rows: Vec<(f64, TransitionMatrix)> = (0..args.levels.0.len())
                    .map(|level| {
                        let matrices: Vec<TransitionMatrix> =
                            per_rep.iter().map(|rows| rows[level].1).collect();
                        (
                            args.levels.0[level],
                            TransitionMatrix::mean(&matrices).expect("repetitions >= 1"),
                        )
                    })
                    .collect();
                let path = global
                    .out_dir
                    .join(format!("{}.transitions.mean.csv", args.name));
                write_text(&path, &transition_matrices_csv(&mean_rows))?;
                println!(
                    "wrote {} transition files and their mean {}",
                    args.repetitions,
                    path.display()
                );
                outputs.push(path_str(&path));
            }

            for (lambda, matrix) in &per_rep[0] {
                let stay: Vec<String> = (0..4)
                    .map(|q| format!("Q{}:{:.2}", q + 1, matrix.probs()[q][q]))
                    .collect();
                println!(
                    "lambda {lambda}%: quartile self-transition {}",
                    stay.join(" ")
                );
            }
            outputs
        }
        PerturbMode::Removal => {
            let assembled = assemble_pool(
                &pool,
                &scenario,
                args.policy,
                &NominalTravel,
                labeled_seed(global.seed, "policy"),
                args.oracle_limit,
            )?;
            warn_fallbacks(&assembled.fallbacks);
            let percents = args.sweep.expand();
            let seeds: Vec<u64> = (0..args.repetitions)
                .map(|rep| indexed_seed(perturb_seed, rep, 0))
                .collect();
            let points = removal_sweep(&assembled.coas, &scenario, &percents, &seeds)?;

            let path = global.out_dir.join(format!("{}.removal.csv", args.name));
            write_text(&path, &removal_points_csv(&points))?;
            for chunk in points.chunks(percents.len()) {
                let survivors = chunk.last().expect("non-empty sweep");
                println!(
                    "seed {}: {} of {} COAs still valid at {}% removal",
                    survivors.seed,
                    survivors.n_valid,
                    pool.n_coas(),
                    survivors.removal_percent
                );
            }
            println!("wrote {}", path.display());
            vec![path_str(&path)]
        }
    };

    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        tool: TOOL,
        version: VERSION,
        // Mode-qualified so a noise run and a removal run under the same
        // --name keep separate manifests instead of overwriting each other.
        command: match args.mode {
            PerturbMode::Noise => "perturb-noise",
            PerturbMode::Removal => "perturb-removal",
        },
        args: json!({
            "scenario": path_str(&args.scenario),
            "pool": path_str(&args.pool),
            "mode": args.mode.as_str(),
            "policy": args.policy.to_string(),
            "levels": args.levels.0,
            "sweep": {
                "start": args.sweep.start,
                "end": args.sweep.end,
                "step": args.sweep.step,
            },
            "repetitions": args.repetitions,
            "oracle_limit": args.oracle_limit,
            "name": args.name,
        }),
        seed: global.seed,
        sub_seeds: manifest::sub_seeds(global.seed),
        inputs: vec![path_str(&args.scenario), path_str(&args.pool)],
        outputs,
        duration_seconds: started.elapsed().as_secs_f64(),
    };
    manifest::write(&global.out_dir, &args.name, &manifest)?;
    Ok(())
}
