//! Hidden Markov games and their reduction to a hidden Markov model.
//!
//! A hidden Markov game is a repeated two-player bimatrix game in which the
//! informed (column) player's payoff table is selected by a latent type that
//! evolves as a Markov chain. The uninformed (row) player sees only the
//! informed player's actions. The reduction maps types to hidden states and
//! uses each type's mixed-equilibrium column strategy as that state's
//! emission row, so transition structure can be recovered from observed
//! actions alone with emission-clamped Baum-Welch.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{BimatrixGame, GameError, StrategySet};
use crate::game::{GameFile, DISTRIBUTION_TOLERANCE};
use crate::hmm::{
    baum_welch, uniform_perturbed_transitions, HiddenMarkovModel, HmmError, TrainingConfig,
    TrainingOutcome,
};

#[derive(Debug, Error)]
pub enum HmgError {
    #[error("invalid hidden Markov game: {0}")]
    InvalidGame(String),
    #[error("type {type_label:?}: {source}")]
    TypeGame {
        type_label: String,
        #[source]
        source: GameError,
    },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error(transparent)]
    Hmm(#[from] HmmError),
    #[error("malformed hidden Markov game file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("failed to access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Transition table to start from when reducing a game to a model.
#[derive(Debug, Clone)]
pub enum TransitionInit {
    /// A known row-stochastic table over the informed player's types.
    Matrix(Vec<Vec<f64>>),
    /// Uniform rows with seeded perturbation, for use before any estimate
    /// exists.
    UniformPerturbed { seed: u64 },
}

/// A two-player repeated game whose informed (column) player has a latent
/// type per round; each type selects a payoff table over shared strategy
/// sets.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenMarkovGame {
    informed_types: Vec<String>,
    type_games: Vec<BimatrixGame>,
    prior: Vec<f64>,
}

impl HiddenMarkovGame {
    /// `type_games` is aligned with `informed_types`; every game must share
    /// the same row and column strategy sets.
    pub fn new(
        informed_types: Vec<String>,
        type_games: Vec<BimatrixGame>,
        prior: Vec<f64>,
    ) -> Result<Self, HmgError> {
        if informed_types.is_empty() {
            return Err(HmgError::InvalidGame("need at least one type".into()));
        }
        if type_games.len() != informed_types.len() {
            return Err(HmgError::InvalidGame(format!(
                "{} games for {} types",
                type_games.len(),
                informed_types.len()
            )));
        }
        for (i, label) in informed_types.iter().enumerate() {
            if informed_types[..i].contains(label) {
                return Err(HmgError::InvalidGame(format!("duplicate type {label:?}")));
            }
        }
        let reference = &type_games[0];
        for (label, game) in informed_types.iter().zip(&type_games) {
            if game.row_strategies() != reference.row_strategies()
                || game.col_strategies() != reference.col_strategies()
            {
                return Err(HmgError::InvalidGame(format!(
                    "type {label:?} uses different strategy sets"
                )));
            }
        }
        if prior.len() != informed_types.len() {
            return Err(HmgError::InvalidGame(format!(
                "prior over {} entries for {} types",
                prior.len(),
                informed_types.len()
            )));
        }
        for &p in &prior {
            if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                return Err(HmgError::InvalidGame(format!(
                    "prior entry {p} outside [0, 1]"
                )));
            }
        }
        let total: f64 = prior.iter().sum();
        if (total - 1.0).abs() > DISTRIBUTION_TOLERANCE {
            return Err(HmgError::InvalidGame(format!(
                "prior sums to {total}, expected 1"
            )));
        }
        Ok(Self {
            informed_types,
            type_games,
            prior,
        })
    }

    pub fn informed_types(&self) -> &[String] {
        &self.informed_types
    }

    pub fn n_types(&self) -> usize {
        self.informed_types.len()
    }

    pub fn type_games(&self) -> &[BimatrixGame] {
        &self.type_games
    }

    pub fn type_game(&self, index: usize) -> &BimatrixGame {
        &self.type_games[index]
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    /// The observation alphabet: the informed (column) player's strategies.
    pub fn observation_labels(&self) -> &StrategySet {
        self.type_games[0].col_strategies()
    }

    pub fn n_observations(&self) -> usize {
        self.observation_labels().len()
    }

    /// One emission row per type: the informed player's mixed-equilibrium
    /// strategy in that type's game.
    pub fn build_emission_matrix(&self) -> Result<Vec<Vec<f64>>, HmgError> {
        self.informed_types
            .iter()
            .zip(&self.type_games)
            .map(|(label, game)| {
                let equilibrium =
                    game.mixed_equilibrium_2x2()
                        .map_err(|source| HmgError::TypeGame {
                            type_label: label.clone(),
                            source,
                        })?;
                Ok(equilibrium.col.probabilities().to_vec())
            })
            .collect()
    }

    /// Reduce the game to a hidden Markov model: states are the informed
    /// player's types, emissions come from [`Self::build_emission_matrix`],
    /// and the initial distribution is the prior.
    pub fn to_hmm(&self, init: TransitionInit) -> Result<HiddenMarkovModel, HmgError> {
        let transitions = match init {
            TransitionInit::Matrix(matrix) => {
                if matrix.len() != self.n_types() {
                    return Err(HmgError::DimensionMismatch(format!(
                        "{} transition rows for {} types",
                        matrix.len(),
                        self.n_types()
                    )));
                }
                matrix
            }
            TransitionInit::UniformPerturbed { seed } => {
                uniform_perturbed_transitions(self.n_types(), seed)
            }
        };
        let emissions = self.build_emission_matrix()?;
        let model = HiddenMarkovModel::new(transitions, emissions, self.prior.clone())?
            .with_labels(
                Some(self.informed_types.clone()),
                Some(self.observation_labels().labels().to_vec()),
            )?;
        Ok(model)
    }

    /// Estimate the type transition table from observed informed-player
    /// actions: emission-clamped Baum-Welch from a seeded perturbed-uniform
    /// start. Emissions and the initial distribution of the result are
    /// bit-identical to [`Self::to_hmm`]'s construction.
    pub fn infer_transitions(
        &self,
        obs: &[usize],
        config: &TrainingConfig,
    ) -> Result<TrainingOutcome, HmgError> {
        let start = self.to_hmm(TransitionInit::UniformPerturbed { seed: config.seed })?;
        let config = TrainingConfig {
            clamp_emissions: true,
            clamp_initial: true,
            ..config.clone()
        };
        Ok(baum_welch(obs, &start, &config)?)
    }

    /// Expected-payoff-maximizing row for the uninformed player, given a
    /// predicted distribution over the informed player's next action and a
    /// posterior over types. Ties resolve to the lowest row index.
    pub fn best_response(
        &self,
        predicted: &[f64],
        believed_type: &TypePosterior,
    ) -> Result<usize, HmgError> {
        if predicted.len() != self.n_observations() {
            return Err(HmgError::DimensionMismatch(format!(
                "predicted distribution over {} actions, expected {}",
                predicted.len(),
                self.n_observations()
            )));
        }
        if believed_type.probabilities().len() != self.n_types() {
            return Err(HmgError::DimensionMismatch(format!(
                "posterior over {} types, expected {}",
                believed_type.probabilities().len(),
                self.n_types()
            )));
        }
        let n_rows = self.type_games[0].n_rows();
        let mut best_row = 0;
        let mut best_value = f64::NEG_INFINITY;
        for row in 0..n_rows {
            let mut value = 0.0;
            for (weight, game) in believed_type.probabilities().iter().zip(&self.type_games) {
                for (col, &p) in predicted.iter().enumerate() {
                    value += weight * p * game.row_payoff(row, col);
                }
            }
            if value > best_value {
                best_value = value;
                best_row = row;
            }
        }
        Ok(best_row)
    }

    pub fn from_json_str(json: &str) -> Result<Self, HmgError> {
        let file: HmgFile = serde_json::from_str(json)?;
        file.try_into()
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&HmgFile::from(self)).expect("game serialization")
    }

    pub fn load(path: &Path) -> Result<Self, HmgError> {
        let text = fs::read_to_string(path).map_err(|source| HmgError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), HmgError> {
        fs::write(path, self.to_json_string()).map_err(|source| HmgError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

/// Posterior over the informed player's types after a history of observed
/// actions.
#[derive(Debug, Clone, PartialEq)]
pub struct TypePosterior {
    probabilities: Vec<f64>,
    argmax: usize,
    argmax_label: Option<String>,
}

impl TypePosterior {
    /// Ties resolve to the lowest type index.
    pub fn from_probabilities(
        probabilities: Vec<f64>,
        labels: Option<&[String]>,
    ) -> Result<Self, HmgError> {
        if probabilities.is_empty() {
            return Err(HmgError::InvalidGame("empty posterior".into()));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(HmgError::InvalidGame(format!(
                "posterior sums to {total}, expected 1"
            )));
        }
        let mut argmax = 0;
        for (i, &p) in probabilities.iter().enumerate() {
            if p > probabilities[argmax] {
                argmax = i;
            }
        }
        let argmax_label = labels.map(|l| l[argmax].clone());
        Ok(Self {
            probabilities,
            argmax,
            argmax_label,
        })
    }

    pub fn uniform(n_types: usize, labels: Option<&[String]>) -> Result<Self, HmgError> {
        Self::from_probabilities(vec![1.0 / n_types as f64; n_types], labels)
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn argmax_index(&self) -> usize {
        self.argmax
    }

    pub fn argmax_label(&self) -> Option<&str> {
        self.argmax_label.as_deref()
    }
}

/// Filtered posterior over types for a model produced by
/// [`HiddenMarkovGame::to_hmm`] or [`HiddenMarkovGame::infer_transitions`].
pub fn type_posterior(model: &HiddenMarkovModel, obs: &[usize]) -> Result<TypePosterior, HmgError> {
    let probabilities = model.filter(obs)?;
    TypePosterior::from_probabilities(probabilities, model.state_labels())
}

/// Distribution of the informed player's next action given the observed
/// history.
pub fn predict_opponent_action(
    model: &HiddenMarkovModel,
    obs: &[usize],
) -> Result<Vec<f64>, HmgError> {
    Ok(model.predict_next_observation(obs)?)
}

/// On-disk shape of a hidden Markov game.
#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct HmgFile {
    pub types: Vec<String>,
    pub games: BTreeMap<String, GameFile>,
    pub prior: Vec<f64>,
    pub observations: Vec<String>,
}

impl From<&HiddenMarkovGame> for HmgFile {
    fn from(hmg: &HiddenMarkovGame) -> Self {
        let games = hmg
            .informed_types
            .iter()
            .zip(&hmg.type_games)
            .map(|(label, game)| (label.clone(), GameFile::from(game)))
            .collect();
        Self {
            types: hmg.informed_types.clone(),
            games,
            prior: hmg.prior.clone(),
            observations: hmg.observation_labels().labels().to_vec(),
        }
    }
}

impl TryFrom<HmgFile> for HiddenMarkovGame {
    type Error = HmgError;

    fn try_from(mut file: HmgFile) -> Result<Self, HmgError> {
        let mut games = Vec::with_capacity(file.types.len());
        for label in &file.types {
            let game_file = file.games.remove(label).ok_or_else(|| {
                HmgError::InvalidGame(format!("no game given for type {label:?}"))
            })?;
            let game: BimatrixGame = game_file.try_into().map_err(|source| HmgError::TypeGame {
                type_label: label.clone(),
                source,
            })?;
            games.push(game);
        }
        if let Some(extra) = file.games.keys().next() {
            return Err(HmgError::InvalidGame(format!(
                "game given for unknown type {extra:?}"
            )));
        }
        let hmg = HiddenMarkovGame::new(file.types, games, file.prior)?;
        if file.observations != hmg.observation_labels().labels() {
            return Err(HmgError::InvalidGame(format!(
                "observations {:?} do not match the informed player's strategies {:?}",
                file.observations,
                hmg.observation_labels().labels()
            )));
        }
        Ok(hmg)
    }
}
