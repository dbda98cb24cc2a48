use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use serde_json::json;

use coaplan_core::seed::{indexed_seed, labeled_seed};
use coaplan_core::{
    assemble_pool, load_pool, load_scenario, mape, pool_report_csv, rank_lexicographic,
    resample_deadlines, AssembledPool, NominalTravel, PolicyKind, DEFAULT_ORACLE_LIMIT,
};

use crate::args::{parse_deadline_range, parse_policy};
use crate::error::Result;
use crate::manifest::{self, RunManifest, SCHEMA_VERSION, TOOL, VERSION};

use super::{ensure_out_dir, path_str, warn_fallbacks, write_text, Global};

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Scenario JSON produced by gen-scenario.
    #[arg(long)]
    pub scenario: PathBuf,

    /// Pool JSON produced by allocate.
    #[arg(long)]
    pub pool: PathBuf,

    /// Sequencing policy: random, greedy, or exact.
    #[arg(long, value_parser = parse_policy)]
    pub policy: PolicyKind,

    /// Also sequence with this policy and report the MAPE of --policy's
    /// per-COA completed counts against it.
    #[arg(long, value_parser = parse_policy)]
    pub against: Option<PolicyKind>,

    /// Sequence this many times with resampled deadlines and report per-COA
    /// mean/std completed counts.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..), default_value_t = 1)]
    pub repeats: u64,

    /// Deadline resampling range for --repeats, as `lo:hi` seconds.
    #[arg(long, value_parser = parse_deadline_range, default_value = "500:50000")]
    pub deadline_range: (f64, f64),

    /// Largest assignment the exact policy sequences before falling back to greedy.
    #[arg(long, default_value_t = DEFAULT_ORACLE_LIMIT)]
    pub oracle_limit: usize,

    /// Artifact base name inside --out-dir.
    #[arg(long, default_value = "report")]
    pub name: String,
}

fn completed_counts(assembled: &AssembledPool) -> Vec<usize> {
    assembled.coas.iter().map(|c| c.total_completed).collect()
}

pub fn run(global: &Global, args: &EvaluateArgs) -> Result<()> {
    let started = Instant::now();
    let scenario = load_scenario(&args.scenario)?;
    let pool = load_pool(&args.pool)?.to_pool()?;
    let policy_seed = labeled_seed(global.seed, "policy");

    let assembled = assemble_pool(
        &pool,
        &scenario,
        args.policy,
        &NominalTravel,
        policy_seed,
        args.oracle_limit,
    )?;
    warn_fallbacks(&assembled.fallbacks);
    let ranked = rank_lexicographic(&assembled.coas)?;

    ensure_out_dir(&global.out_dir)?;
    let report_path = global.out_dir.join(format!("{}.report.csv", args.name));
    write_text(&report_path, &pool_report_csv(&ranked, args.policy))?;
    let mut outputs = vec![path_str(&report_path)];

    let best = &ranked.entries()[0];
    println!(
        "{} COAs under {}: best is COA {} with {}/{} tasks in {}",
        ranked.len(),
        args.policy,
        best.coa_id,
        best.completed,
        scenario.n_tasks(),
        best.total_time
    );
    println!("wrote {}", report_path.display());

    if let Some(against) = args.against {
        let reference = if against == args.policy {
            completed_counts(&assembled)
        } else {
            let reference = assemble_pool(
                &pool,
                &scenario,
                against,
                &NominalTravel,
                policy_seed,
                args.oracle_limit,
            )?;
            warn_fallbacks(&reference.fallbacks);
            completed_counts(&reference)
        };
        let result = mape(&completed_counts(&assembled), &reference)?;
        println!(
            "MAPE of {} against {}: {}% ({} COAs scored, {} skipped)",
            args.policy, against, result.percent, result.used, result.skipped
        );
        let mape_path = global.out_dir.join(format!("{}.mape.json", args.name));
        let mut text = serde_json::to_string_pretty(&json!({
            "schema_version": SCHEMA_VERSION,
            "policy": args.policy.to_string(),
            "against": against.to_string(),
            "mape_percent": result.percent,
            "coas_scored": result.used,
            "coas_skipped": result.skipped,
        }))
        .expect("static JSON shape");
        text.push('\n');
        write_text(&mape_path, &text)?;
        outputs.push(path_str(&mape_path));
        println!("wrote {}", mape_path.display());
    }

    if args.repeats > 1 {
        let deadline_seed = labeled_seed(global.seed, "scenario");
        let n = pool.n_coas();
        let mut sums = vec![0.0f64; n];
        let mut squares = vec![0.0f64; n];
        for rep in 0..args.repeats {
            let variant = resample_deadlines(
                &scenario,
                args.deadline_range,
                indexed_seed(deadline_seed, rep, 0),
            )?;
            let rebound = pool.rebound(&variant)?;
            let run = assemble_pool(
                &rebound,
                &variant,
                args.policy,
                &NominalTravel,
                policy_seed,
                args.oracle_limit,
            )?;
            for (i, coa) in run.coas.iter().enumerate() {
                let c = coa.total_completed as f64;
                sums[i] += c;
                squares[i] += c * c;
            }
        }
        let reps = args.repeats as f64;
        let mut csv = String::from("coa_id,repeats,mean_completed,std_completed\n");
        for i in 0..n {
            let mean = sums[i] / reps;
            let std = (squares[i] / reps - mean * mean).max(0.0).sqrt();
            csv.push_str(&format!("{},{},{},{}\n", i, args.repeats, mean, std));
        }
        let repeats_path = global.out_dir.join(format!("{}.repeats.csv", args.name));
        write_text(&repeats_path, &csv)?;
        outputs.push(path_str(&repeats_path));
        println!(
            "per-COA completed counts over {} deadline re-seeds: wrote {}",
            args.repeats,
            repeats_path.display()
        );
    }

    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        tool: TOOL,
        version: VERSION,
        command: "evaluate",
        args: json!({
            "scenario": path_str(&args.scenario),
            "pool": path_str(&args.pool),
            "policy": args.policy.to_string(),
            "against": args.against.map(|p| p.to_string()),
            "repeats": args.repeats,
            "deadline_range": [args.deadline_range.0, args.deadline_range.1],
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
