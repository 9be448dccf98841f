//! All five prediction policies against the same serve streams: a reduced
//! version of the shipped aggressive scenario, with exports written to a
//! temporary directory.
//!
//! ```bash
//! cargo run -p hmg --example run_tournament
//! ```

use hmg::experiments::{export_result, run_scenario, ScenarioConfig};

fn main() {
    // The shipped scenario trimmed for a quick run; drop the overrides to
    // reproduce the full 10,000-round, ten-seed experiment.
    let config = ScenarioConfig {
        horizon: 2_000,
        seeds: vec![1, 2, 3],
        ..hmg::tennis::aggressive_scenario()
    };
    println!(
        "running scenario {:?}: {} rounds x {} seeds\n",
        config.name,
        config.horizon,
        config.seeds.len()
    );
    let result = run_scenario(&config).unwrap();

    println!("mean hit rate per policy:");
    let mut ranked: Vec<_> = result
        .policies
        .iter()
        .zip(&result.mean_final_hit_rates)
        .collect();
    ranked.sort_by(|a, b| b.1.partial_cmp(a.1).unwrap());
    for (policy, rate) in ranked {
        println!("  {:<10} {rate:.4}", policy.name());
    }
    println!(
        "\nmean model distance to the generator: {:.5}",
        result.mean_model_distance
    );

    let out_dir = std::env::temp_dir().join("hmg-tournament");
    export_result(&result, &out_dir).unwrap();
    println!("exports written to {}", out_dir.display());
    println!("  hit_rates.csv, summary.json, trained_model.json, hit_rates.svg");
}
