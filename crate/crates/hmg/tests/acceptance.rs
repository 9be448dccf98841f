//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (visible with `--nocapture`). Tolerances are pinned in the
//! assertions.

mod common;

use std::fs;
use std::sync::OnceLock;

use hmg::experiments::{export_result, run_scenario, ScenarioConfig, ScenarioResult};
use hmg::game::EquilibriumKind;
use hmg::hmm::{baum_welch, HiddenMarkovModel, TrainingConfig};
use hmg::policies::PolicyKind;
use hmg::tennis;

fn check(label: &str, pass: bool, detail: String) {
    println!(
        "criterion {label}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {label} failed: {detail}");
}

fn aggressive_result() -> &'static ScenarioResult {
    static RESULT: OnceLock<ScenarioResult> = OnceLock::new();
    RESULT.get_or_init(|| run_scenario(&tennis::aggressive_scenario()).unwrap())
}

fn defensive_result() -> &'static ScenarioResult {
    static RESULT: OnceLock<ScenarioResult> = OnceLock::new();
    RESULT.get_or_init(|| run_scenario(&tennis::defensive_scenario()).unwrap())
}

/// Criterion 1: the worked 2x2 game has pure equilibria exactly at
/// {(s1,s2),(s2,s1)} and the interior mixed equilibrium p = q = (1/3, 2/3),
/// within 1e-12.
#[test]
fn criterion_1_worked_game_equilibria() {
    let game = hmg::game::BimatrixGame::from_tables(
        &["s1", "s2"],
        &["s1", "s2"],
        &[(3.0, 3.0), (2.0, 5.0), (5.0, 2.0), (1.0, 1.0)],
    )
    .unwrap();
    let pure = game.pure_nash_equilibria();
    let eq = game.mixed_equilibrium_2x2().unwrap();
    let max_err = [
        (eq.row.probability(0) - 1.0 / 3.0).abs(),
        (eq.row.probability(1) - 2.0 / 3.0).abs(),
        (eq.col.probability(0) - 1.0 / 3.0).abs(),
        (eq.col.probability(1) - 2.0 / 3.0).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    check(
        "1 (worked-game equilibria)",
        pure == vec![(0, 1), (1, 0)] && eq.kind == EquilibriumKind::Mixed && max_err <= 1e-12,
        format!("pure = {pure:?}, mixed error = {max_err:.2e}"),
    );
}

/// Criterion 2: the informed player's equilibrium mixes for the three tennis
/// tables match the independent grid-refinement indifference oracle within
/// 1e-5 (expected Open probabilities near 0.6916 / 0.4643 / 0.4000).
#[test]
fn criterion_2_emission_derivation_vs_grid_oracle() {
    let games = [
        tennis::aggressive_game(),
        tennis::moderate_game(),
        tennis::defensive_game(),
    ];
    let expected_open = [0.6916, 0.4643, 0.4000];
    let mut worst = 0.0_f64;
    for (game, rough) in games.iter().zip(expected_open) {
        let (oracle_p, oracle_q) = common::grid_refined_indifference_mix(game);
        let (row_gap, col_gap) = common::indifference_gaps(game, oracle_p, oracle_q);
        assert!(
            row_gap < 1e-5 && col_gap < 1e-5,
            "oracle did not converge: gaps {row_gap:.2e}/{col_gap:.2e}"
        );
        let eq = game.mixed_equilibrium_2x2().unwrap();
        worst = worst
            .max((eq.col.probability(0) - oracle_q).abs())
            .max((eq.row.probability(0) - oracle_p).abs());
        assert!(
            (eq.col.probability(0) - rough).abs() < 5e-5,
            "solver strayed from the expected value {rough}"
        );
    }
    check(
        "2 (emission derivation)",
        worst <= 1e-5,
        format!("max |solver - grid oracle| = {worst:.2e}"),
    );
}

/// Criterion 3: likelihood, filtering, and next-observation prediction agree
/// with exhaustive hidden-path enumeration within 1e-10 for every fixture
/// model and every observation sequence of length <= 6.
#[test]
fn criterion_3_brute_force_equivalence() {
    let mut worst = 0.0_f64;
    let mut cases = 0_usize;
    for (name, model) in common::fixture_models() {
        for length in 1..=6 {
            for obs in common::all_sequences(model.n_observations(), length) {
                let probability = common::enumerated_probability(&model, &obs);
                let ll = model.log_likelihood(&obs).unwrap();
                worst = worst.max((ll.exp() - probability).abs());

                let filtered = model.filter(&obs).unwrap();
                for (a, b) in filtered.iter().zip(common::enumerated_filter(&model, &obs)) {
                    worst = worst.max((a - b).abs());
                }

                let predicted = model.predict_next_observation(&obs).unwrap();
                for (a, b) in predicted
                    .iter()
                    .zip(common::enumerated_next_observation(&model, &obs))
                {
                    worst = worst.max((a - b).abs());
                }
                cases += 1;
                let _ = name;
            }
        }
    }
    check(
        "3 (brute-force equivalence)",
        worst <= 1e-10,
        format!("max abs error = {worst:.2e} over {cases} sequences x 3 models"),
    );
}

/// Criterion 4: every training run keeps the log-likelihood trace
/// non-decreasing within 1e-8 slack, and emission clamping carries B through
/// bit-identically.
#[test]
fn criterion_4_em_properties() {
    let hmg = tennis::tennis_hmg();
    let generator = hmg
        .to_hmm(hmg::hmg::TransitionInit::Matrix(
            tennis::aggressive_transitions(),
        ))
        .unwrap();
    let reference = hmg
        .to_hmm(hmg::hmg::TransitionInit::UniformPerturbed { seed: 0 })
        .unwrap();

    let mut runs = 0;
    let mut worst_drop = 0.0_f64;
    let mut clamped_bits_ok = true;

    // Clamped runs across lengths and seeds.
    for (length, seed) in [(100, 1_u64), (1_000, 2), (10_000, 3)] {
        let (obs, _) = generator.sample(length, seed);
        let outcome = hmg
            .infer_transitions(
                &obs,
                &TrainingConfig {
                    seed,
                    ..TrainingConfig::default()
                },
            )
            .unwrap();
        for pair in outcome.log_likelihood_trace.windows(2) {
            worst_drop = worst_drop.max(pair[0] - pair[1]);
        }
        let reduction = hmg
            .to_hmm(hmg::hmg::TransitionInit::UniformPerturbed { seed })
            .unwrap();
        for (a, b) in outcome.model.emissions().iter().zip(reduction.emissions()) {
            for (x, y) in a.iter().zip(b) {
                clamped_bits_ok &= x.to_bits() == y.to_bits();
            }
        }
        runs += 1;
        let _ = &reference;
    }

    // An unclamped run on a different model shape.
    let free_model = HiddenMarkovModel::new(
        vec![vec![0.85, 0.15], vec![0.25, 0.75]],
        vec![vec![0.7, 0.3], vec![0.35, 0.65]],
        vec![0.5, 0.5],
    )
    .unwrap();
    let (obs, _) = free_model.sample(3_000, 9);
    let start = HiddenMarkovModel::new(
        vec![vec![0.5, 0.5], vec![0.5, 0.5]],
        vec![vec![0.6, 0.4], vec![0.4, 0.6]],
        vec![0.5, 0.5],
    )
    .unwrap();
    let outcome = baum_welch(
        &obs,
        &start,
        &TrainingConfig {
            clamp_emissions: false,
            clamp_initial: false,
            ..TrainingConfig::default()
        },
    )
    .unwrap();
    for pair in outcome.log_likelihood_trace.windows(2) {
        worst_drop = worst_drop.max(pair[0] - pair[1]);
    }
    runs += 1;

    check(
        "4 (EM properties)",
        worst_drop <= 1e-8 && clamped_bits_ok,
        format!("worst trace drop = {worst_drop:.2e} over {runs} runs, clamped B bit-identical = {clamped_bits_ok}"),
    );
}

/// Criterion 5: training on 10^4 observations of the shipped aggressive
/// scenario recovers the generator to a symmetric model distance <= 0.05,
/// averaged over the ten shipped seeds.
#[test]
fn criterion_5_transition_recovery() {
    let result = aggressive_result();
    check(
        "5 (transition recovery)",
        result.mean_model_distance <= 0.05,
        format!(
            "mean distance = {:.5} over {} seeds (per-seed max {:.5})",
            result.mean_model_distance,
            result.runs.len(),
            result
                .runs
                .iter()
                .map(|r| r.model_distance)
                .fold(f64::NEG_INFINITY, f64::max)
        ),
    );
}

/// Criterion 6: over ten seeds x 10^4 rounds in both shipped scenarios the
/// proposed policy's mean hit rate is strictly greatest, beats the
/// most-frequent baseline by at least 0.05, and the random baseline sits in
/// 0.5 +- 0.02.
#[test]
fn criterion_6_policy_ordering() {
    let mut pass = true;
    let mut details = Vec::new();
    for result in [aggressive_result(), defensive_result()] {
        let proposed = result.mean_hit_rate(PolicyKind::Proposed);
        let frequent = result.mean_hit_rate(PolicyKind::MoreFrequently);
        let random = result.mean_hit_rate(PolicyKind::Random);
        for kind in PolicyKind::ALL {
            if kind != PolicyKind::Proposed {
                pass &= proposed > result.mean_hit_rate(kind);
            }
        }
        pass &= proposed - frequent >= 0.05;
        pass &= (random - 0.5).abs() <= 0.02;
        details.push(format!(
            "{}: proposed {proposed:.4}, gap {:.4}, random {random:.4}",
            result.name,
            proposed - frequent
        ));
    }
    check("6 (policy ordering)", pass, details.join("; "));
}

/// Criterion 7: re-running a scenario with an identical config produces
/// bit-identical exported CSV/JSON (and chart) files.
#[test]
fn criterion_7_reproducibility() {
    let config = ScenarioConfig {
        horizon: 2_000,
        seeds: vec![11, 12, 13],
        ..tennis::aggressive_scenario()
    };
    let base = std::env::temp_dir().join(format!("hmg-acceptance-{}", std::process::id()));
    let dir_a = base.join("a");
    let dir_b = base.join("b");
    let _ = fs::remove_dir_all(&base);

    export_result(&run_scenario(&config).unwrap(), &dir_a).unwrap();
    export_result(&run_scenario(&config).unwrap(), &dir_b).unwrap();

    let mut pass = true;
    let mut compared = Vec::new();
    for file in [
        "hit_rates.csv",
        "summary.json",
        "trained_model.json",
        "hit_rates.svg",
    ] {
        let a = fs::read(dir_a.join(file)).unwrap();
        let b = fs::read(dir_b.join(file)).unwrap();
        pass &= a == b;
        compared.push(format!("{file} ({} bytes)", a.len()));
    }
    fs::remove_dir_all(&base).unwrap();
    check(
        "7 (reproducibility)",
        pass,
        format!("byte-identical: {}", compared.join(", ")),
    );
}
