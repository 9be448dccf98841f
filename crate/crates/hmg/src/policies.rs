//! Per-round prediction policies and the hit-rate metric.
//!
//! Five decision rules share one interface: the proposed filtered-HMM
//! predictor, a transition-blind Bayesian variant of it, and the random /
//! most-frequent / tit-for-tat baselines. Each policy predicts the opponent's
//! next action before the round and is updated with the realized
//! [`RoundRecord`] afterwards; the hit rate is the fraction of rounds where
//! prediction and realized action agree.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::hmm::{HiddenMarkovModel, HmmError};

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("policy {0} needs a trained model")]
    MissingModel(PolicyKind),
    #[error("empty history")]
    EmptyHistory,
    #[error("action index {index} out of range for {n_actions} actions")]
    ActionOutOfRange { index: usize, n_actions: usize },
    #[error(transparent)]
    Hmm(#[from] HmmError),
    #[error("unknown policy {0:?}")]
    UnknownPolicy(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyKind {
    /// Filtered type posterior propagated through the trained transition
    /// table; predicts the most likely next action.
    Proposed,
    /// Same trained model with transitions ignored (identity dynamics):
    /// the one-shot Bayesian-game treatment of each round.
    Bayesian,
    /// Seeded uniform draw every round.
    Random,
    /// The modal opponent action seen so far.
    MoreFrequently,
    /// Repeats the opponent's last action.
    TitForTat,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 5] = [
        PolicyKind::Proposed,
        PolicyKind::Bayesian,
        PolicyKind::Random,
        PolicyKind::MoreFrequently,
        PolicyKind::TitForTat,
    ];

    /// Stable command-line-facing name.
    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Proposed => "proposed",
            PolicyKind::Bayesian => "bayesian",
            PolicyKind::Random => "random",
            PolicyKind::MoreFrequently => "frequent",
            PolicyKind::TitForTat => "tft",
        }
    }

    fn needs_model(self) -> bool {
        matches!(self, PolicyKind::Proposed | PolicyKind::Bayesian)
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = PolicyError;

    fn from_str(s: &str) -> Result<Self, PolicyError> {
        PolicyKind::ALL
            .into_iter()
            .find(|kind| kind.name() == s)
            .ok_or_else(|| PolicyError::UnknownPolicy(s.to_string()))
    }
}

/// One completed round: what the opponent did, what we did, and what we had
/// predicted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoundRecord {
    pub round_index: usize,
    pub opponent_action: usize,
    pub own_action: usize,
    pub predicted_action: usize,
}

/// A policy plus everything it has learned from the match so far.
///
/// Beliefs are maintained incrementally and always equal what a from-scratch
/// recomputation over the full history would give. Prediction streams are
/// deterministic per seed.
#[derive(Debug, Clone)]
pub struct PolicyState {
    kind: PolicyKind,
    n_actions: usize,
    history: Vec<RoundRecord>,
    action_counts: Vec<u64>,
    /// Type belief for the model-based kinds; `None` until the first update.
    belief: Option<Vec<f64>>,
    rng: ChaCha8Rng,
}

impl PolicyState {
    pub fn new(kind: PolicyKind, n_actions: usize, seed: u64) -> Self {
        assert!(n_actions > 0, "need at least one action");
        Self {
            kind,
            n_actions,
            history: Vec::new(),
            action_counts: vec![0; n_actions],
            belief: None,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    pub fn history(&self) -> &[RoundRecord] {
        &self.history
    }

    /// Current type belief of a model-based policy, or `None` before any
    /// update (the model's prior applies then).
    pub fn belief(&self) -> Option<&[f64]> {
        self.belief.as_deref()
    }

    /// Predict the opponent's next action. Model-based kinds need the
    /// trained model; the baselines ignore it. One call per round: the
    /// random kind consumes its seeded stream.
    pub fn predict(&mut self, trained: Option<&HiddenMarkovModel>) -> Result<usize, PolicyError> {
        match self.kind {
            PolicyKind::Random => Ok(self.rng.random_range(0..self.n_actions)),
            PolicyKind::TitForTat => match self.history.last() {
                Some(record) => Ok(record.opponent_action),
                None => Ok(self.rng.random_range(0..self.n_actions)),
            },
            PolicyKind::MoreFrequently => {
                let mut best = 0;
                for (action, &count) in self.action_counts.iter().enumerate() {
                    if count > self.action_counts[best] {
                        best = action;
                    }
                }
                Ok(best)
            }
            PolicyKind::Proposed | PolicyKind::Bayesian => {
                let distribution = self.prediction_distribution(trained)?;
                Ok(argmax(&distribution))
            }
        }
    }

    /// Full predicted distribution over opponent actions for the model-based
    /// kinds.
    pub fn prediction_distribution(
        &self,
        trained: Option<&HiddenMarkovModel>,
    ) -> Result<Vec<f64>, PolicyError> {
        let model = trained.ok_or(PolicyError::MissingModel(self.kind))?;
        let belief = match &self.belief {
            Some(belief) => belief.clone(),
            None => model.initial().to_vec(),
        };
        let k = model.n_observations();
        let n = model.n_states();
        let state_weights = match self.kind {
            // One transition step for the proposed policy; the Bayesian kind
            // replaces the transition table with the identity.
            PolicyKind::Proposed => {
                let mut next = vec![0.0; n];
                for (i, &w) in belief.iter().enumerate() {
                    for j in 0..n {
                        next[j] += w * model.transitions()[i][j];
                    }
                }
                next
            }
            PolicyKind::Bayesian => belief,
            _ => return Err(PolicyError::MissingModel(self.kind)),
        };
        let mut distribution = vec![0.0; k];
        for (j, &w) in state_weights.iter().enumerate() {
            for h in 0..k {
                distribution[h] += w * model.emissions()[j][h];
            }
        }
        Ok(distribution)
    }

    /// Fold a completed round into the policy state.
    pub fn update(
        &mut self,
        record: RoundRecord,
        trained: Option<&HiddenMarkovModel>,
    ) -> Result<(), PolicyError> {
        if record.opponent_action >= self.n_actions {
            return Err(PolicyError::ActionOutOfRange {
                index: record.opponent_action,
                n_actions: self.n_actions,
            });
        }
        if record.predicted_action >= self.n_actions {
            return Err(PolicyError::ActionOutOfRange {
                index: record.predicted_action,
                n_actions: self.n_actions,
            });
        }
        if self.kind.needs_model() {
            let model = trained.ok_or(PolicyError::MissingModel(self.kind))?;
            let observed = record.opponent_action;
            let n = model.n_states();
            let mut next = match &self.belief {
                // Forward recursion step; the first observation conditions
                // the prior directly.
                Some(belief) => match self.kind {
                    PolicyKind::Proposed => {
                        let mut propagated = vec![0.0; n];
                        for (i, &w) in belief.iter().enumerate() {
                            for j in 0..n {
                                propagated[j] += w * model.transitions()[i][j];
                            }
                        }
                        propagated
                    }
                    _ => belief.clone(),
                },
                None => model.initial().to_vec(),
            };
            let mut total = 0.0;
            for (j, value) in next.iter_mut().enumerate() {
                *value *= model.emissions()[j][observed];
                total += *value;
            }
            if total <= 0.0 {
                return Err(PolicyError::Hmm(HmmError::ZeroProbabilityObservation {
                    position: record.round_index,
                }));
            }
            for value in &mut next {
                *value /= total;
            }
            self.belief = Some(next);
        }
        self.action_counts[record.opponent_action] += 1;
        self.history.push(record);
        Ok(())
    }
}

/// Lowest index wins ties.
fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Fraction of rounds whose prediction matched the opponent's action.
pub fn hit_rate(records: &[RoundRecord]) -> Result<f64, PolicyError> {
    if records.is_empty() {
        return Err(PolicyError::EmptyHistory);
    }
    let hits = records
        .iter()
        .filter(|r| r.predicted_action == r.opponent_action)
        .count();
    Ok(hits as f64 / records.len() as f64)
}
