//! Minimal end-to-end library use: sample a world, evolve a pool, sequence
//! it greedily, and print the ranked result. Mirrors the README example.

use coaplan_core::{
    assemble_pool, rank_lexicographic, run_ga, sample_scenario, GaConfig, NominalTravel,
    PolicyKind, Result, SampleConfig,
};

fn main() -> Result<()> {
    let scenario = sample_scenario(&SampleConfig::new(40, 3, 7))?;
    let ga = GaConfig {
        iterations: 1000,
        seed: 7,
        ..GaConfig::default()
    };
    let outcome = run_ga(&scenario, 10, &ga)?;
    let assembled = assemble_pool(
        &outcome.pool,
        &scenario,
        PolicyKind::Greedy,
        &NominalTravel,
        7,
        16,
    )?;
    let ranked = rank_lexicographic(&assembled.coas)?;
    for coa in ranked.entries() {
        println!(
            "COA {} completed {} tasks (Q{})",
            coa.coa_id, coa.completed, coa.quartile
        );
    }
    Ok(())
}
