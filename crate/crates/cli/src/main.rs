//! `coaplan` — plan, rank, and stress-test pools of diverse multi-agent
//! courses of action.
//!
//! The pipeline is four artifact-producing subcommands plus a provenance
//! viewer:
//!
//! ```text
//! gen-scenario ─► scenario.json ─► allocate ─► pool.json + fitness.csv
//!                                     │
//!                     evaluate ◄──────┴──────► perturb
//!                 report.csv (+mape/repeats)   transitions/removal CSVs
//! ```
//!
//! Every command is a pure function of its inputs, flags, and `--seed`;
//! re-running reproduces CSV and JSON artifacts byte for byte. `report`
//! summarizes the run manifests accumulated in `--out-dir`.

mod args;
mod commands;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{allocate, evaluate, gen_scenario, perturb, report, Global};

#[derive(Parser)]
#[command(
    name = "coaplan",
    version,
    about = "Diverse course-of-action pools: allocation, sequencing, ranking, robustness"
)]
struct Cli {
    /// Master seed; every random choice derives from it through labeled
    /// sub-streams (scenario, ga, policy, perturb).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Directory artifacts are written into.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,

    /// Worker threads; 0 uses every available core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a random scenario to JSON.
    GenScenario(gen_scenario::GenScenarioArgs),
    /// Evolve a diverse, high-compatibility COA pool for a scenario.
    Allocate(allocate::AllocateArgs),
    /// Sequence, rank, and report a pool under a policy.
    Evaluate(evaluate::EvaluateArgs),
    /// Stress a pool with travel-time noise or edge removal.
    Perturb(perturb::PerturbArgs),
    /// Summarize the run manifests in the output directory.
    Report,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap exits 2 on usage errors and 0 on --help/--version.
            let code = u8::try_from(e.exit_code()).unwrap_or(2);
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .ok();
    }
    let global = Global {
        seed: cli.seed,
        out_dir: cli.out_dir.clone(),
    };
    let result = match &cli.command {
        Command::GenScenario(args) => gen_scenario::run(&global, args),
        Command::Allocate(args) => allocate::run(&global, args),
        Command::Evaluate(args) => evaluate::run(&global, args),
        Command::Perturb(args) => perturb::run(&global, args),
        Command::Report => report::run(&global),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
