//! Discrete hidden Markov models with numerically stable inference.
//!
//! Forward and backward recursions are scaled per step, so likelihoods of
//! sequences with tens of thousands of symbols never underflow. Baum-Welch
//! re-estimation supports clamping the emission table and the initial
//! distribution, which turns it into a transition-only estimator.
//!
//! Probability-zero observations are surfaced, never smoothed away: a
//! sequence that is impossible under a model yields a `-inf` log-likelihood
//! from [`HiddenMarkovModel::log_likelihood`] and an error from every
//! operation that needs a posterior.

use std::fs;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Stochastic rows must sum to one within this tolerance.
pub const STOCHASTIC_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum HmmError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("symbol {symbol} at position {position} out of range for {n_observations} observation symbols")]
    SymbolOutOfRange {
        position: usize,
        symbol: usize,
        n_observations: usize,
    },
    #[error("observation sequence is empty")]
    EmptyObservations,
    #[error("need at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },
    #[error("observation sequence has probability zero under the model (first impossible step: {position})")]
    ZeroProbabilityObservation { position: usize },
    #[error("models emit different alphabets ({left} vs {right} symbols)")]
    AlphabetMismatch { left: usize, right: usize },
    #[error("malformed model file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("failed to access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// A sequence of observation symbol indices.
pub type ObservationSequence = Vec<usize>;

/// A discrete HMM: transition table `A`, emission table `B`, initial
/// distribution, and optional human-readable labels.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenMarkovModel {
    /// `transitions[i][j] = P(next state = j | current state = i)`.
    transitions: Vec<Vec<f64>>,
    /// `emissions[j][h] = P(observe symbol h | state j)`.
    emissions: Vec<Vec<f64>>,
    /// `initial[i] = P(first state = i)`.
    initial: Vec<f64>,
    state_labels: Option<Vec<String>>,
    observation_labels: Option<Vec<String>>,
}

impl HiddenMarkovModel {
    pub fn new(
        transitions: Vec<Vec<f64>>,
        emissions: Vec<Vec<f64>>,
        initial: Vec<f64>,
    ) -> Result<Self, HmmError> {
        let n = initial.len();
        if n == 0 {
            return Err(HmmError::InvalidModel(
                "model needs at least one state".into(),
            ));
        }
        if transitions.len() != n {
            return Err(HmmError::InvalidModel(format!(
                "transition table has {} rows for {n} states",
                transitions.len()
            )));
        }
        if emissions.len() != n {
            return Err(HmmError::InvalidModel(format!(
                "emission table has {} rows for {n} states",
                emissions.len()
            )));
        }
        let k = emissions[0].len();
        if k == 0 {
            return Err(HmmError::InvalidModel(
                "model needs at least one observation symbol".into(),
            ));
        }
        for (i, row) in transitions.iter().enumerate() {
            if row.len() != n {
                return Err(HmmError::InvalidModel(format!(
                    "transition row {i} has {} entries for {n} states",
                    row.len()
                )));
            }
            check_stochastic_row(row, &format!("transition row {i}"))?;
        }
        for (j, row) in emissions.iter().enumerate() {
            if row.len() != k {
                return Err(HmmError::InvalidModel(format!(
                    "emission row {j} has {} entries, expected {k}",
                    row.len()
                )));
            }
            check_stochastic_row(row, &format!("emission row {j}"))?;
        }
        check_stochastic_row(&initial, "initial distribution")?;
        Ok(Self {
            transitions,
            emissions,
            initial,
            state_labels: None,
            observation_labels: None,
        })
    }

    pub fn with_labels(
        mut self,
        state_labels: Option<Vec<String>>,
        observation_labels: Option<Vec<String>>,
    ) -> Result<Self, HmmError> {
        if let Some(labels) = &state_labels {
            if labels.len() != self.n_states() {
                return Err(HmmError::InvalidModel(format!(
                    "{} state labels for {} states",
                    labels.len(),
                    self.n_states()
                )));
            }
        }
        if let Some(labels) = &observation_labels {
            if labels.len() != self.n_observations() {
                return Err(HmmError::InvalidModel(format!(
                    "{} observation labels for {} symbols",
                    labels.len(),
                    self.n_observations()
                )));
            }
        }
        self.state_labels = state_labels;
        self.observation_labels = observation_labels;
        Ok(self)
    }

    pub fn n_states(&self) -> usize {
        self.initial.len()
    }

    pub fn n_observations(&self) -> usize {
        self.emissions[0].len()
    }

    pub fn transitions(&self) -> &[Vec<f64>] {
        &self.transitions
    }

    pub fn emissions(&self) -> &[Vec<f64>] {
        &self.emissions
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    pub fn state_labels(&self) -> Option<&[String]> {
        self.state_labels.as_deref()
    }

    pub fn observation_labels(&self) -> Option<&[String]> {
        self.observation_labels.as_deref()
    }

    /// Draw a hidden path and its observations. Deterministic for a fixed
    /// seed; independent seeds give independent streams.
    pub fn sample(&self, length: usize, seed: u64) -> (ObservationSequence, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut symbols = Vec::with_capacity(length);
        let mut states = Vec::with_capacity(length);
        if length == 0 {
            return (symbols, states);
        }
        let mut state = draw(&self.initial, &mut rng);
        for _ in 0..length {
            states.push(state);
            symbols.push(draw(&self.emissions[state], &mut rng));
            state = draw(&self.transitions[state], &mut rng);
        }
        (symbols, states)
    }

    /// Log-probability of the observations, or `-inf` when the sequence is
    /// impossible under this model.
    pub fn log_likelihood(&self, obs: &[usize]) -> Result<f64, HmmError> {
        match self.forward_scaled(obs) {
            Ok(forward) => Ok(forward.log_likelihood),
            Err(HmmError::ZeroProbabilityObservation { .. }) => Ok(f64::NEG_INFINITY),
            Err(e) => Err(e),
        }
    }

    /// Posterior over hidden states at the final step of `obs`.
    pub fn filter(&self, obs: &[usize]) -> Result<Vec<f64>, HmmError> {
        let forward = self.forward_scaled(obs)?;
        Ok(forward
            .alphas
            .last()
            .expect("non-empty forward pass")
            .clone())
    }

    /// Distribution of the next observation symbol: the filtered posterior
    /// propagated one step through `A` and mixed through `B`. With an empty
    /// history the prior takes the place of the posterior.
    pub fn predict_next_observation(&self, obs: &[usize]) -> Result<Vec<f64>, HmmError> {
        let posterior = if obs.is_empty() {
            self.initial.clone()
        } else {
            self.filter(obs)?
        };
        Ok(self.propagate_and_emit(&posterior))
    }

    /// `(posterior . A) . B` as one row vector.
    fn propagate_and_emit(&self, posterior: &[f64]) -> Vec<f64> {
        let n = self.n_states();
        let k = self.n_observations();
        let mut next_state = vec![0.0; n];
        for (i, &weight) in posterior.iter().enumerate() {
            for j in 0..n {
                next_state[j] += weight * self.transitions[i][j];
            }
        }
        let mut symbols = vec![0.0; k];
        for (j, &weight) in next_state.iter().enumerate() {
            for h in 0..k {
                symbols[h] += weight * self.emissions[j][h];
            }
        }
        symbols
    }

    fn check_symbols(&self, obs: &[usize]) -> Result<(), HmmError> {
        let k = self.n_observations();
        for (position, &symbol) in obs.iter().enumerate() {
            if symbol >= k {
                return Err(HmmError::SymbolOutOfRange {
                    position,
                    symbol,
                    n_observations: k,
                });
            }
        }
        Ok(())
    }

    /// Scaled forward pass. `alphas[t]` is the normalized state posterior
    /// given observations up to and including `t`; the accumulated log scale
    /// equals the sequence log-likelihood.
    fn forward_scaled(&self, obs: &[usize]) -> Result<ScaledForward, HmmError> {
        if obs.is_empty() {
            return Err(HmmError::EmptyObservations);
        }
        self.check_symbols(obs)?;
        let n = self.n_states();
        let mut alphas: Vec<Vec<f64>> = Vec::with_capacity(obs.len());
        let mut scales: Vec<f64> = Vec::with_capacity(obs.len());
        let mut log_likelihood = 0.0;
        for (t, &symbol) in obs.iter().enumerate() {
            let mut alpha = vec![0.0; n];
            for (j, value) in alpha.iter_mut().enumerate() {
                let mass = if t == 0 {
                    self.initial[j]
                } else {
                    let prev = &alphas[t - 1];
                    (0..n)
                        .map(|i| prev[i] * self.transitions[i][j])
                        .sum::<f64>()
                };
                *value = mass * self.emissions[j][symbol];
            }
            let scale: f64 = alpha.iter().sum();
            if scale <= 0.0 {
                return Err(HmmError::ZeroProbabilityObservation { position: t });
            }
            for value in &mut alpha {
                *value /= scale;
            }
            log_likelihood += scale.ln();
            alphas.push(alpha);
            scales.push(scale);
        }
        Ok(ScaledForward {
            alphas,
            scales,
            log_likelihood,
        })
    }

    /// Backward pass scaled with the forward coefficients, so that
    /// `alpha[t][i] * beta[t][i]` is exactly the smoothing posterior.
    fn backward_scaled(&self, obs: &[usize], scales: &[f64]) -> Vec<Vec<f64>> {
        let n = self.n_states();
        let len = obs.len();
        let mut betas = vec![vec![1.0; n]; len];
        for t in (0..len - 1).rev() {
            let next_symbol = obs[t + 1];
            for i in 0..n {
                let mut acc = 0.0;
                for j in 0..n {
                    acc +=
                        self.transitions[i][j] * self.emissions[j][next_symbol] * betas[t + 1][j];
                }
                betas[t][i] = acc / scales[t + 1];
            }
        }
        betas
    }

    pub fn from_json_str(json: &str) -> Result<Self, HmmError> {
        let file: HmmFile = serde_json::from_str(json)?;
        HiddenMarkovModel::new(file.transitions, file.emissions, file.initial)?
            .with_labels(file.state_labels, file.observation_labels)
    }

    pub fn to_json_string(&self) -> String {
        let file = HmmFile {
            transitions: self.transitions.clone(),
            emissions: self.emissions.clone(),
            initial: self.initial.clone(),
            state_labels: self.state_labels.clone(),
            observation_labels: self.observation_labels.clone(),
        };
        serde_json::to_string_pretty(&file).expect("model serialization")
    }

    pub fn load(path: &Path) -> Result<Self, HmmError> {
        let text = fs::read_to_string(path).map_err(|source| HmmError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), HmmError> {
        fs::write(path, self.to_json_string()).map_err(|source| HmmError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

struct ScaledForward {
    alphas: Vec<Vec<f64>>,
    scales: Vec<f64>,
    log_likelihood: f64,
}

fn check_stochastic_row(row: &[f64], what: &str) -> Result<(), HmmError> {
    for &p in row {
        if !p.is_finite() || !(-STOCHASTIC_TOLERANCE..=1.0 + STOCHASTIC_TOLERANCE).contains(&p) {
            return Err(HmmError::InvalidModel(format!(
                "{what} has entry {p} outside [0, 1]"
            )));
        }
    }
    let total: f64 = row.iter().sum();
    if (total - 1.0).abs() > STOCHASTIC_TOLERANCE {
        return Err(HmmError::InvalidModel(format!(
            "{what} sums to {total}, expected 1"
        )));
    }
    Ok(())
}

fn draw(probabilities: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (index, &p) in probabilities.iter().enumerate() {
        acc += p;
        if u < acc {
            return index;
        }
    }
    probabilities.len() - 1
}

/// Settings for Baum-Welch re-estimation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainingConfig {
    pub max_iterations: usize,
    pub log_likelihood_tolerance: f64,
    /// Hold the emission table fixed; only transitions (and optionally the
    /// initial distribution) are re-estimated.
    pub clamp_emissions: bool,
    /// Hold the initial distribution fixed at the starting model's values.
    pub clamp_initial: bool,
    /// Seed for any randomized initialization derived from this config.
    pub seed: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            log_likelihood_tolerance: 1e-6,
            clamp_emissions: false,
            clamp_initial: true,
            seed: 0,
        }
    }
}

impl TrainingConfig {
    fn validate(&self) -> Result<(), HmmError> {
        if self.max_iterations == 0 {
            return Err(HmmError::InvalidModel(
                "max_iterations must be at least 1".into(),
            ));
        }
        // NaN must fail this check too.
        if !self.log_likelihood_tolerance.is_finite() || self.log_likelihood_tolerance <= 0.0 {
            return Err(HmmError::InvalidModel(
                "log_likelihood_tolerance must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Result of a training run: the re-estimated model and the log-likelihood
/// measured at every iteration (non-decreasing, last entry belongs to the
/// returned model).
#[derive(Debug, Clone)]
pub struct TrainingOutcome {
    pub model: HiddenMarkovModel,
    pub log_likelihood_trace: Vec<f64>,
}

/// Baum-Welch expectation-maximization from a starting model.
///
/// Stops when the log-likelihood improves by less than the configured
/// tolerance or after `max_iterations` updates. Clamped tables are carried
/// through bit-identically.
pub fn baum_welch(
    obs: &[usize],
    initial_model: &HiddenMarkovModel,
    config: &TrainingConfig,
) -> Result<TrainingOutcome, HmmError> {
    config.validate()?;
    if obs.len() < 2 {
        return Err(HmmError::TooFewObservations {
            needed: 2,
            got: obs.len(),
        });
    }
    initial_model.check_symbols(obs)?;

    let n = initial_model.n_states();
    let k = initial_model.n_observations();
    let mut model = initial_model.clone();
    let mut trace: Vec<f64> = Vec::new();

    for _ in 0..config.max_iterations {
        let forward = model.forward_scaled(obs)?;
        let log_likelihood = forward.log_likelihood;
        if let Some(&previous) = trace.last() {
            trace.push(log_likelihood);
            if log_likelihood - previous < config.log_likelihood_tolerance {
                return Ok(TrainingOutcome {
                    model,
                    log_likelihood_trace: trace,
                });
            }
        } else {
            trace.push(log_likelihood);
        }

        let betas = model.backward_scaled(obs, &forward.scales);

        let mut xi_sum = vec![vec![0.0; n]; n];
        let mut gamma_from = vec![0.0; n]; // mass available to leave each state
        let mut gamma_total = vec![0.0; n];
        let mut emit_sum = vec![vec![0.0; k]; n];
        let mut gamma_first = vec![0.0; n];

        for t in 0..obs.len() {
            let mut gamma: Vec<f64> = (0..n).map(|i| forward.alphas[t][i] * betas[t][i]).collect();
            let norm: f64 = gamma.iter().sum();
            for g in &mut gamma {
                *g /= norm;
            }
            if t == 0 {
                gamma_first.copy_from_slice(&gamma);
            }
            for i in 0..n {
                gamma_total[i] += gamma[i];
                emit_sum[i][obs[t]] += gamma[i];
                if t + 1 < obs.len() {
                    gamma_from[i] += gamma[i];
                }
            }
            if t + 1 < obs.len() {
                let next_symbol = obs[t + 1];
                let mut local = vec![0.0; n * n];
                let mut total = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        let v = forward.alphas[t][i]
                            * model.transitions[i][j]
                            * model.emissions[j][next_symbol]
                            * betas[t + 1][j];
                        local[i * n + j] = v;
                        total += v;
                    }
                }
                for i in 0..n {
                    for j in 0..n {
                        xi_sum[i][j] += local[i * n + j] / total;
                    }
                }
            }
        }

        let mut transitions = model.transitions.clone();
        for i in 0..n {
            if gamma_from[i] > 0.0 {
                for j in 0..n {
                    transitions[i][j] = xi_sum[i][j] / gamma_from[i];
                }
                normalize_row(&mut transitions[i]);
            }
        }
        let emissions = if config.clamp_emissions {
            model.emissions.clone()
        } else {
            let mut emissions = model.emissions.clone();
            for j in 0..n {
                if gamma_total[j] > 0.0 {
                    for h in 0..k {
                        emissions[j][h] = emit_sum[j][h] / gamma_total[j];
                    }
                    normalize_row(&mut emissions[j]);
                }
            }
            emissions
        };
        let initial = if config.clamp_initial {
            model.initial.clone()
        } else {
            gamma_first
        };

        model = HiddenMarkovModel::new(transitions, emissions, initial)?
            .with_labels(model.state_labels.clone(), model.observation_labels.clone())?;
    }

    // Iteration budget exhausted; close the trace with the final model.
    let forward = model.forward_scaled(obs)?;
    trace.push(forward.log_likelihood);
    Ok(TrainingOutcome {
        model,
        log_likelihood_trace: trace,
    })
}

fn normalize_row(row: &mut [f64]) {
    let total: f64 = row.iter().sum();
    if total > 0.0 {
        for value in row.iter_mut() {
            *value /= total;
        }
    }
}

/// Symmetrized per-symbol cross log-likelihood deficit between two models.
///
/// Each model generates one sequence of the given length (both from the same
/// seed, which makes the measure exactly symmetric in its arguments), the
/// other model scores it, and the average per-symbol deficit is negated into
/// a non-negative dissimilarity. Finite-length estimates can come out
/// slightly negative; the raw value is returned unclipped.
pub fn model_distance(
    a: &HiddenMarkovModel,
    b: &HiddenMarkovModel,
    sequence_length: usize,
    seed: u64,
) -> Result<f64, HmmError> {
    if a.n_observations() != b.n_observations() {
        return Err(HmmError::AlphabetMismatch {
            left: a.n_observations(),
            right: b.n_observations(),
        });
    }
    assert!(sequence_length > 0, "sequence_length must be positive");
    let (obs_a, _) = a.sample(sequence_length, seed);
    let (obs_b, _) = b.sample(sequence_length, seed);
    let length = sequence_length as f64;
    // Propagate the zero-probability error (with its position) rather than
    // reporting -inf: an impossible cross sequence is a modelling error here.
    let ll_a_on_b = a.forward_scaled(&obs_b)?.log_likelihood;
    let ll_b_on_b = b.forward_scaled(&obs_b)?.log_likelihood;
    let ll_b_on_a = b.forward_scaled(&obs_a)?.log_likelihood;
    let ll_a_on_a = a.forward_scaled(&obs_a)?.log_likelihood;
    let deficit_ab = (ll_a_on_b - ll_b_on_b) / length;
    let deficit_ba = (ll_b_on_a - ll_a_on_a) / length;
    // The `+ 0.0` turns the identical-model case into exactly 0, not -0.
    Ok(-(deficit_ab + deficit_ba) / 2.0 + 0.0)
}

/// Uniform transition rows perturbed by seeded noise of magnitude 0.05 and
/// renormalized. Used to break EM symmetry deterministically when no
/// transition estimate exists yet.
pub fn uniform_perturbed_transitions(n_states: usize, seed: u64) -> Vec<Vec<f64>> {
    assert!(n_states > 0, "need at least one state");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let uniform = 1.0 / n_states as f64;
    (0..n_states)
        .map(|_| {
            let mut row: Vec<f64> = (0..n_states)
                .map(|_| (uniform + rng.random_range(-0.05..0.05)).max(1e-6))
                .collect();
            normalize_row(&mut row);
            row
        })
        .collect()
}

/// Render a log-likelihood trace as `iteration,log_likelihood` CSV.
pub fn trace_csv(trace: &[f64]) -> String {
    let mut out = String::from("iteration,log_likelihood\n");
    for (iteration, value) in trace.iter().enumerate() {
        out.push_str(&format!("{iteration},{value}\n"));
    }
    out
}

/// On-disk shape of a model.
#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct HmmFile {
    pub transitions: Vec<Vec<f64>>,
    pub emissions: Vec<Vec<f64>>,
    pub initial: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state_labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observation_labels: Option<Vec<String>>,
}
