//! The tennis serve-and-return application: three server types with their
//! payoff tables, the resulting hidden Markov game, and the two shipped
//! scenarios.
//!
//! The payoff tables are the published aggressive/moderate/defensive
//! profiles, with the server as the column player and the receiver as the
//! row player. The scenario transition tables are reconstructions: the
//! source material describes them only qualitatively ("more probability to
//! stay in the aggressive state"), so the shipped values are documented
//! defaults chosen to make the type dynamics identifiable, not published
//! data. Every scenario field is plain configuration and can be overridden.

use crate::experiments::ScenarioConfig;
use crate::game::BimatrixGame;
use crate::hmg::HiddenMarkovGame;
use crate::hmm::TrainingConfig;

/// Seeds used by the shipped scenarios: ten fixed integers.
pub const DEFAULT_SEEDS: [u64; 10] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];

fn tennis_game(cells: &[(f64, f64)]) -> BimatrixGame {
    BimatrixGame::from_tables(&["Open", "Center"], &["Open", "Center"], cells)
        .expect("static payoff table")
}

/// Aggressive server profile. Receiver (row) payoffs listed first in each
/// cell.
pub fn aggressive_game() -> BimatrixGame {
    tennis_game(&[(0.65, 0.35), (0.89, 0.11), (0.98, 0.02), (0.15, 0.85)])
}

/// Moderate server profile.
pub fn moderate_game() -> BimatrixGame {
    tennis_game(&[(0.15, 0.85), (0.80, 0.20), (0.90, 0.10), (0.15, 0.85)])
}

/// Defensive server profile.
pub fn defensive_game() -> BimatrixGame {
    tennis_game(&[(0.10, 0.90), (0.55, 0.45), (0.85, 0.15), (0.05, 0.95)])
}

/// The three-type tennis game with a uniform prior over server types.
pub fn tennis_hmg() -> HiddenMarkovGame {
    HiddenMarkovGame::new(
        vec!["Aggressive".into(), "Moderate".into(), "Defensive".into()],
        vec![aggressive_game(), moderate_game(), defensive_game()],
        vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
    )
    .expect("static game definition")
}

/// Reconstructed type dynamics for a server who mostly stays aggressive.
///
/// Diagonal-dominant with the largest self-loop and the most stationary mass
/// (about 0.45) on the aggressive state. Dwell times are long enough, and
/// the stationary action marginal close enough to even, for type tracking to
/// beat frequency counting by a visible margin; the equilibrium emission
/// rows are only mildly informative, so faster-mixing chains make every
/// predictor collapse toward the marginal.
pub fn aggressive_transitions() -> Vec<Vec<f64>> {
    vec![
        vec![0.992, 0.005, 0.003],
        vec![0.013, 0.970, 0.017],
        vec![0.004, 0.006, 0.990],
    ]
}

/// The aggressive table mirrored onto the defensive corner: the self-loop
/// mass moves to the defensive state.
pub fn defensive_transitions() -> Vec<Vec<f64>> {
    let source = aggressive_transitions();
    let n = source.len();
    (0..n)
        .map(|i| (0..n).map(|j| source[n - 1 - i][n - 1 - j]).collect())
        .collect()
}

fn scenario(name: &str, true_transitions: Vec<Vec<f64>>) -> ScenarioConfig {
    ScenarioConfig {
        name: name.to_string(),
        hmg: tennis_hmg(),
        true_transitions,
        horizon: 10_000,
        eval_interval: 200,
        seeds: DEFAULT_SEEDS.to_vec(),
        training: TrainingConfig::default(),
        retrain_at_checkpoints: false,
        windowed_hit_rate: false,
    }
}

/// Scenario 1: mostly-aggressive server, 10,000 rounds, checkpoints every
/// 200, ten seeds.
pub fn aggressive_scenario() -> ScenarioConfig {
    scenario("aggressive", aggressive_transitions())
}

/// Scenario 2: mostly-defensive server.
pub fn defensive_scenario() -> ScenarioConfig {
    scenario("defensive", defensive_transitions())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::EquilibriumKind;

    #[test]
    fn server_equilibrium_mixes_match_the_closed_forms() {
        // Indifference equations solved by hand: the server's Open
        // probability is 74/107, 13/28, and 2/5 for the three profiles.
        let expected = [74.0 / 107.0, 13.0 / 28.0, 2.0 / 5.0];
        for (game, open) in [aggressive_game(), moderate_game(), defensive_game()]
            .iter()
            .zip(expected)
        {
            let eq = game.mixed_equilibrium_2x2().unwrap();
            assert_eq!(eq.kind, EquilibriumKind::Mixed);
            assert!((eq.col.probability(0) - open).abs() < 1e-12);
        }
    }

    #[test]
    fn receiver_equilibrium_mixes_match_the_closed_forms() {
        let expected = [83.0 / 107.0, 15.0 / 28.0, 16.0 / 25.0];
        for (game, open) in [aggressive_game(), moderate_game(), defensive_game()]
            .iter()
            .zip(expected)
        {
            let eq = game.mixed_equilibrium_2x2().unwrap();
            assert!((eq.row.probability(0) - open).abs() < 1e-12);
        }
    }

    #[test]
    fn emission_rows_are_the_server_mixes() {
        let emissions = tennis_hmg().build_emission_matrix().unwrap();
        assert!((emissions[0][0] - 74.0 / 107.0).abs() < 1e-12);
        assert!((emissions[1][0] - 13.0 / 28.0).abs() < 1e-12);
        assert!((emissions[2][0] - 2.0 / 5.0).abs() < 1e-12);
        for row in &emissions {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn scenario_transition_tables_are_stochastic_and_mirrored() {
        for table in [aggressive_transitions(), defensive_transitions()] {
            for row in &table {
                assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
        let aggressive = aggressive_transitions();
        let defensive = defensive_transitions();
        assert_eq!(aggressive[0][0], defensive[2][2]);
        assert_eq!(aggressive[2][2], defensive[0][0]);
        // The aggressive scenario keeps the most mass on the aggressive
        // state, the defensive one on the defensive state.
        assert!(aggressive[0][0] >= aggressive[1][1]);
        assert!(defensive[2][2] >= defensive[1][1]);
    }

    #[test]
    fn shipped_scenarios_validate() {
        aggressive_scenario().validate().unwrap();
        defensive_scenario().validate().unwrap();
        assert_eq!(aggressive_scenario().horizon, 10_000);
        assert_eq!(aggressive_scenario().eval_interval, 200);
        assert_eq!(aggressive_scenario().seeds.len(), 10);
    }
}
