//! How model similarity behaves: the symmetric per-symbol log-likelihood
//! deficit between the generator and models trained on growing observation
//! streams, plus a deliberately wrong model for scale.
//!
//! ```bash
//! cargo run -p hmg --example compare_models
//! ```

use hmg::hmg::TransitionInit;
use hmg::hmm::{model_distance, TrainingConfig};

fn main() {
    let game = hmg::tennis::tennis_hmg();
    let truth = game
        .to_hmm(TransitionInit::Matrix(hmg::tennis::aggressive_transitions()))
        .unwrap();
    let seed = 3;
    let (observations, _) = truth.sample(10_000, seed);

    println!("distance of trained models to the generator (seed {seed}):");
    for prefix in [100, 1_000, 10_000] {
        let trained = game
            .infer_transitions(
                &observations[..prefix],
                &TrainingConfig {
                    seed,
                    ..TrainingConfig::default()
                },
            )
            .unwrap()
            .model;
        let d = model_distance(&truth, &trained, 10_000, seed).unwrap();
        println!("  trained on {prefix:>6} observations: {d:.5}");
    }

    // An untrained and a structurally wrong model for scale.
    let untrained = game
        .to_hmm(TransitionInit::UniformPerturbed { seed })
        .unwrap();
    println!(
        "  untrained initialization:       {:.5}",
        model_distance(&truth, &untrained, 10_000, seed).unwrap()
    );

    let wrong = game
        .to_hmm(TransitionInit::Matrix(vec![
            vec![0.05, 0.05, 0.90],
            vec![0.90, 0.05, 0.05],
            vec![0.05, 0.90, 0.05],
        ]))
        .unwrap();
    println!(
        "  cycling-type model:             {:.5}",
        model_distance(&truth, &wrong, 10_000, seed).unwrap()
    );

    println!(
        "\nself-distance is exactly {}",
        model_distance(&truth, &truth, 10_000, seed).unwrap()
    );
    println!("finite-length estimates can dip slightly below zero; values are reported unclipped");
}
