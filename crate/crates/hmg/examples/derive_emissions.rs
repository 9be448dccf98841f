//! From payoff tables to an observation model: each server type's
//! mixed-equilibrium strategy becomes one emission row of the reduced hidden
//! Markov model.
//!
//! ```bash
//! cargo run -p hmg --example derive_emissions
//! ```

use hmg::hmg::TransitionInit;

fn main() {
    let game = hmg::tennis::tennis_hmg();

    println!("per-type equilibrium serve mixes (emission rows):");
    let emissions = game.build_emission_matrix().unwrap();
    for (label, row) in game.informed_types().iter().zip(&emissions) {
        println!(
            "  {label:<10} -> P(Open) = {:.4}, P(Center) = {:.4}",
            row[0], row[1]
        );
    }

    let model = game
        .to_hmm(TransitionInit::Matrix(hmg::tennis::aggressive_transitions()))
        .unwrap();
    println!("\nfull reduction with the aggressive-scenario dynamics:");
    println!("{}", model.to_json_string());
}
