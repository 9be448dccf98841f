//! Hidden Markov games: repeated two-player bimatrix games in which the
//! opponent's payoff-relevant type drifts as an unobserved Markov chain.
//!
//! The library covers the full loop for the uninformed player:
//!
//! - [`game`]: normal-form bimatrix games, pure Nash enumeration, and the
//!   exact mixed equilibrium of 2x2 games;
//! - [`hmm`]: a numerically stable hidden Markov model core: sampling,
//!   scaled forward filtering, next-observation prediction, Baum-Welch
//!   training with optional emission clamping, and a symmetric model
//!   distance;
//! - [`hmg`]: the reduction of a typed game to an HMM whose emission rows
//!   are the per-type mixed-equilibrium strategies, plus type posteriors and
//!   best responses;
//! - [`policies`]: the proposed filtered predictor and the bayesian /
//!   random / most-frequent / tit-for-tat baselines behind one interface;
//! - [`experiments`]: a seeded, reproducible scenario runner with CSV /
//!   JSON / SVG export;
//! - [`tennis`]: the worked serve-and-return application with three server
//!   types and two shipped scenarios.
//!
//! # Quick start
//!
//! ```
//! use hmg::hmg::TransitionInit;
//! use hmg::hmm::TrainingConfig;
//!
//! // The three-type tennis game, reduced to a hidden Markov model.
//! let game = hmg::tennis::tennis_hmg();
//! let truth = game
//!     .to_hmm(TransitionInit::Matrix(hmg::tennis::aggressive_transitions()))
//!     .unwrap();
//!
//! // Watch the opponent play, then recover the type dynamics from actions
//! // alone (emissions stay clamped to the equilibrium mixes).
//! let (actions, _) = truth.sample(2_000, 7);
//! let trained = game
//!     .infer_transitions(&actions, &TrainingConfig::default())
//!     .unwrap()
//!     .model;
//!
//! // Predict the next serve and pick the best reply.
//! let predicted = hmg::hmg::predict_opponent_action(&trained, &actions).unwrap();
//! let posterior = hmg::hmg::type_posterior(&trained, &actions).unwrap();
//! let reply = game.best_response(&predicted, &posterior).unwrap();
//! assert!(reply < 2);
//! ```
//!
//! # Examples
//!
//! Each major capability has a runnable example:
//!
//! ```bash
//! cargo run -p hmg --example solve_game        # equilibria of payoff tables
//! cargo run -p hmg --example derive_emissions  # per-type equilibrium mixes -> emission rows
//! cargo run -p hmg --example train_model       # clamped Baum-Welch on sampled actions
//! cargo run -p hmg --example predict_next_move # filtering, prediction, best response
//! cargo run -p hmg --example compare_models    # model distance vs. training length
//! cargo run -p hmg --example run_tournament    # all five policies over a scenario
//! ```
//!
//! The `hmg` binary exposes the same operations for scripted use; see
//! `hmg --help`.

pub mod cli;
pub mod experiments;
pub mod game;
#[allow(clippy::module_inception)]
pub mod hmg;
pub mod hmm;
pub mod policies;
pub mod tennis;

pub use experiments::{run_scenario, run_scenario_with_jobs, ScenarioConfig, ScenarioResult};
pub use game::{BimatrixGame, EquilibriumKind, EquilibriumProfile, MixedStrategy, StrategySet};
pub use hmg::{HiddenMarkovGame, TransitionInit, TypePosterior};
pub use hmm::{baum_welch, model_distance, HiddenMarkovModel, TrainingConfig};
pub use policies::{hit_rate, PolicyKind, PolicyState, RoundRecord};
