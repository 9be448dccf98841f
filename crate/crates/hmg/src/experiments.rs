//! Seeded scenario runner: generate an observation stream from a ground-truth
//! model, train the emission-clamped model on it, replay the stream against
//! every policy, and export hit-rate series, a summary, the trained model,
//! and a chart.
//!
//! Everything is deterministic per scenario seed. Each seed's sampling,
//! training initialization, policy randomness, and distance estimation use
//! sub-streams derived with a SplitMix64 mix, so seeds can run concurrently
//! and still merge into bit-identical results in seed order.

use std::fs;
use std::path::{Path, PathBuf};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hmg::{HiddenMarkovGame, HmgError, HmgFile, TransitionInit, TypePosterior};
use crate::hmm::{model_distance, HiddenMarkovModel, TrainingConfig};
use crate::policies::{hit_rate, PolicyError, PolicyKind, PolicyState, RoundRecord};

const SAMPLE_SALT: u64 = 0;
const TRAIN_SALT: u64 = 1;
const DISTANCE_SALT: u64 = 2;
const POLICY_SALT: u64 = 3;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("seed {seed}, round {round}: {source}")]
    Round {
        seed: u64,
        round: usize,
        #[source]
        source: PolicyError,
    },
    #[error("seed {seed}: {source}")]
    Seed {
        seed: u64,
        #[source]
        source: HmgError,
    },
    #[error(transparent)]
    Hmg(#[from] HmgError),
    #[error("malformed scenario file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("failed to access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// SplitMix64 mix of a seed and a salt; used to derive independent
/// sub-streams from one scenario seed.
pub(crate) fn derive_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Inputs of one reproducible experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub hmg: HiddenMarkovGame,
    /// Ground-truth type transition table used only to generate observations.
    pub true_transitions: Vec<Vec<f64>>,
    pub horizon: usize,
    /// Rounds between hit-rate checkpoints. When the horizon is not a
    /// multiple, the trailing partial window gets no checkpoint; final hit
    /// rates always cover the full run.
    pub eval_interval: usize,
    pub seeds: Vec<u64>,
    pub training: TrainingConfig,
    /// Retrain on the growing prefix at every checkpoint instead of training
    /// once on the full stream.
    pub retrain_at_checkpoints: bool,
    /// Checkpoint hit rates over the last interval only instead of
    /// cumulatively.
    pub windowed_hit_rate: bool,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.horizon == 0 {
            return Err(ExperimentError::InvalidScenario(
                "horizon must be positive".into(),
            ));
        }
        if self.eval_interval == 0 || self.eval_interval > self.horizon {
            return Err(ExperimentError::InvalidScenario(format!(
                "eval_interval {} must be in 1..={}",
                self.eval_interval, self.horizon
            )));
        }
        if self.seeds.is_empty() {
            return Err(ExperimentError::InvalidScenario(
                "need at least one seed".into(),
            ));
        }
        // Row-stochasticity of true_transitions is checked by the model
        // constructor.
        self.hmg
            .to_hmm(TransitionInit::Matrix(self.true_transitions.clone()))?;
        Ok(())
    }

    pub fn from_json_str(json: &str, base_dir: Option<&Path>) -> Result<Self, ExperimentError> {
        let file: ScenarioFile = serde_json::from_str(json)?;
        file.into_config(base_dir)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&ScenarioFile::from(self)).expect("scenario serialization")
    }

    /// Relative `hmg` paths inside the file resolve against the scenario
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = fs::read_to_string(path).map_err(|source| ExperimentError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text, path.parent())
    }

    pub fn save(&self, path: &Path) -> Result<(), ExperimentError> {
        fs::write(path, self.to_json_string()).map_err(|source| ExperimentError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

/// Everything measured for one seed.
#[derive(Debug, Clone)]
pub struct SeedRun {
    pub seed: u64,
    /// `hit_rate_series[policy][checkpoint]`, policies in
    /// [`PolicyKind::ALL`] order.
    pub hit_rate_series: Vec<Vec<f64>>,
    /// Hit rate over the complete record list per policy.
    pub final_hit_rates: Vec<f64>,
    pub trained_model: HiddenMarkovModel,
    pub model_distance: f64,
}

/// Aggregated outcome of a scenario across seeds.
#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub name: String,
    pub horizon: usize,
    pub eval_interval: usize,
    /// Round counts at which hit rates were checkpointed.
    pub checkpoints: Vec<usize>,
    pub policies: Vec<PolicyKind>,
    /// Per-seed measurements, in config seed order.
    pub runs: Vec<SeedRun>,
    /// Mean final hit rate per policy, aligned with `policies`.
    pub mean_final_hit_rates: Vec<f64>,
    /// Mean symmetric model distance between generator and trained model.
    pub mean_model_distance: f64,
    /// Wall-clock time of the run; informational only, never exported.
    pub elapsed: Duration,
}

impl ScenarioResult {
    pub fn mean_hit_rate(&self, kind: PolicyKind) -> f64 {
        let index = self
            .policies
            .iter()
            .position(|&k| k == kind)
            .expect("policy present");
        self.mean_final_hit_rates[index]
    }

    /// Mean hit-rate series for one policy across seeds.
    pub fn mean_series(&self, kind: PolicyKind) -> Vec<f64> {
        let index = self
            .policies
            .iter()
            .position(|&k| k == kind)
            .expect("policy present");
        let mut series = vec![0.0; self.checkpoints.len()];
        for run in &self.runs {
            for (value, &rate) in series.iter_mut().zip(&run.hit_rate_series[index]) {
                *value += rate;
            }
        }
        for value in &mut series {
            *value /= self.runs.len() as f64;
        }
        series
    }
}

/// Run a scenario with one worker thread per available core (capped by the
/// seed count).
pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioResult, ExperimentError> {
    let jobs = thread::available_parallelism().map_or(1, |n| n.get());
    run_scenario_with_jobs(config, jobs)
}

/// Run a scenario with at most `jobs` seeds in flight. Results are merged in
/// seed order, so the job count never changes the output.
pub fn run_scenario_with_jobs(
    config: &ScenarioConfig,
    jobs: usize,
) -> Result<ScenarioResult, ExperimentError> {
    config.validate()?;
    let jobs = jobs.max(1).min(config.seeds.len());
    let started = Instant::now();

    let mut runs: Vec<Option<Result<SeedRun, ExperimentError>>> =
        (0..config.seeds.len()).map(|_| None).collect();
    if jobs == 1 {
        for (slot, &seed) in runs.iter_mut().zip(&config.seeds) {
            *slot = Some(run_seed(config, seed));
        }
    } else {
        let next = std::sync::atomic::AtomicUsize::new(0);
        let slots = std::sync::Mutex::new(&mut runs);
        thread::scope(|scope| {
            for _ in 0..jobs {
                scope.spawn(|| loop {
                    let index = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                    if index >= config.seeds.len() {
                        break;
                    }
                    let run = run_seed(config, config.seeds[index]);
                    slots.lock().expect("seed slot lock")[index] = Some(run);
                });
            }
        });
    }

    let runs: Vec<SeedRun> = runs
        .into_iter()
        .map(|slot| slot.expect("every seed ran"))
        .collect::<Result<_, _>>()?;

    let policies = PolicyKind::ALL.to_vec();
    let mean_final_hit_rates = (0..policies.len())
        .map(|p| runs.iter().map(|run| run.final_hit_rates[p]).sum::<f64>() / runs.len() as f64)
        .collect();
    let mean_model_distance =
        runs.iter().map(|run| run.model_distance).sum::<f64>() / runs.len() as f64;
    let checkpoints = (1..=config.horizon / config.eval_interval)
        .map(|i| i * config.eval_interval)
        .collect();

    Ok(ScenarioResult {
        name: config.name.clone(),
        horizon: config.horizon,
        eval_interval: config.eval_interval,
        checkpoints,
        policies,
        runs,
        mean_final_hit_rates,
        mean_model_distance,
        elapsed: started.elapsed(),
    })
}

fn run_seed(config: &ScenarioConfig, seed: u64) -> Result<SeedRun, ExperimentError> {
    let wrap = |source: HmgError| ExperimentError::Seed { seed, source };

    let generator = config
        .hmg
        .to_hmm(TransitionInit::Matrix(config.true_transitions.clone()))
        .map_err(wrap)?;
    let (observations, _) = generator.sample(config.horizon, derive_seed(seed, SAMPLE_SALT));

    let training = TrainingConfig {
        seed: derive_seed(seed, TRAIN_SALT),
        ..config.training.clone()
    };
    // Train once on the full stream unless checkpoint retraining is on; the
    // replay below then scores policies against the finished model. Retrain
    // mode starts from the untrained reduction until the first checkpoint.
    let mut trained = if config.retrain_at_checkpoints {
        config
            .hmg
            .to_hmm(TransitionInit::UniformPerturbed {
                seed: training.seed,
            })
            .map_err(wrap)?
    } else {
        config
            .hmg
            .infer_transitions(&observations, &training)
            .map_err(wrap)?
            .model
    };

    let n_actions = config.hmg.n_observations();
    let mut policies: Vec<PolicyState> = PolicyKind::ALL
        .iter()
        .enumerate()
        .map(|(i, &kind)| {
            PolicyState::new(kind, n_actions, derive_seed(seed, POLICY_SALT + i as u64))
        })
        .collect();
    let mut records: Vec<Vec<RoundRecord>> =
        vec![Vec::with_capacity(config.horizon); policies.len()];
    let mut series: Vec<Vec<f64>> = vec![Vec::new(); policies.len()];
    let uniform_posterior =
        TypePosterior::uniform(config.hmg.n_types(), Some(config.hmg.informed_types()))
            .map_err(wrap)?;

    for round in 0..config.horizon {
        // Checkpoint retraining happens before the round is played, on the
        // data seen so far.
        if config.retrain_at_checkpoints && round % config.eval_interval == 0 && round >= 2 {
            let outcome = config
                .hmg
                .infer_transitions(&observations[..round], &training)
                .map_err(wrap)?;
            trained = outcome.model;
            // Model changed: rebuild the model-based beliefs from scratch.
            for (policy, recs) in policies.iter_mut().zip(&records) {
                if matches!(policy.kind(), PolicyKind::Proposed | PolicyKind::Bayesian) {
                    let mut fresh = PolicyState::new(policy.kind(), n_actions, 0);
                    for record in recs {
                        fresh.update(*record, Some(&trained)).map_err(|source| {
                            ExperimentError::Round {
                                seed,
                                round,
                                source,
                            }
                        })?;
                    }
                    *policy = fresh;
                }
            }
        }

        let opponent_action = observations[round];
        for (policy, recs) in policies.iter_mut().zip(records.iter_mut()) {
            let model = Some(&trained);
            let predicted = policy
                .predict(model)
                .map_err(|source| ExperimentError::Round {
                    seed,
                    round,
                    source,
                })?;
            let own_action = match policy.kind() {
                PolicyKind::Proposed => {
                    let distribution = policy.prediction_distribution(model).map_err(|source| {
                        ExperimentError::Round {
                            seed,
                            round,
                            source,
                        }
                    })?;
                    let posterior = match policy.belief() {
                        Some(belief) => TypePosterior::from_probabilities(
                            belief.to_vec(),
                            Some(config.hmg.informed_types()),
                        )
                        .map_err(wrap)?,
                        None => uniform_posterior.clone(),
                    };
                    config
                        .hmg
                        .best_response(&distribution, &posterior)
                        .map_err(wrap)?
                }
                _ => {
                    let mut point = vec![0.0; n_actions];
                    point[predicted] = 1.0;
                    config
                        .hmg
                        .best_response(&point, &uniform_posterior)
                        .map_err(wrap)?
                }
            };
            let record = RoundRecord {
                round_index: round,
                opponent_action,
                own_action,
                predicted_action: predicted,
            };
            policy
                .update(record, model)
                .map_err(|source| ExperimentError::Round {
                    seed,
                    round,
                    source,
                })?;
            recs.push(record);
        }

        if (round + 1) % config.eval_interval == 0 {
            for (recs, series) in records.iter().zip(series.iter_mut()) {
                let scored = if config.windowed_hit_rate {
                    &recs[recs.len() - config.eval_interval..]
                } else {
                    &recs[..]
                };
                series.push(hit_rate(scored).expect("non-empty checkpoint window"));
            }
        }
    }

    let final_hit_rates = records
        .iter()
        .map(|recs| hit_rate(recs).expect("non-empty history"))
        .collect();
    let distance = model_distance(
        &generator,
        &trained,
        config.horizon,
        derive_seed(seed, DISTANCE_SALT),
    )
    .map_err(|source| ExperimentError::Seed {
        seed,
        source: source.into(),
    })?;

    Ok(SeedRun {
        seed,
        hit_rate_series: series,
        final_hit_rates,
        trained_model: trained,
        model_distance: distance,
    })
}

/// Write `hit_rates.csv`, `summary.json`, `trained_model.json`, and
/// `hit_rates.svg` into `directory`. Output bytes depend only on the result's
/// numeric content.
pub fn export_result(
    result: &ScenarioResult,
    directory: &Path,
) -> Result<Vec<PathBuf>, ExperimentError> {
    let io_err = |path: &Path| {
        let path = path.display().to_string();
        move |source: std::io::Error| ExperimentError::Io {
            path: path.clone(),
            source,
        }
    };
    fs::create_dir_all(directory).map_err(io_err(directory))?;

    let csv_path = directory.join("hit_rates.csv");
    let mut csv = String::from("checkpoint,seed,policy,hit_rate\n");
    for run in &result.runs {
        for (policy_index, policy) in result.policies.iter().enumerate() {
            for (checkpoint, rate) in result
                .checkpoints
                .iter()
                .zip(&run.hit_rate_series[policy_index])
            {
                csv.push_str(&format!("{checkpoint},{},{policy},{rate:.6}\n", run.seed));
            }
        }
    }
    fs::write(&csv_path, csv).map_err(io_err(&csv_path))?;

    let summary_path = directory.join("summary.json");
    let summary = SummaryFile::from(result);
    let summary_json = serde_json::to_string_pretty(&summary).expect("summary serialization");
    fs::write(&summary_path, summary_json).map_err(io_err(&summary_path))?;

    let model_path = directory.join("trained_model.json");
    fs::write(&model_path, result.runs[0].trained_model.to_json_string())
        .map_err(io_err(&model_path))?;

    let chart_path = directory.join("hit_rates.svg");
    fs::write(&chart_path, render_chart(result)).map_err(io_err(&chart_path))?;

    Ok(vec![csv_path, summary_path, model_path, chart_path])
}

/// Exported summary: final per-policy means and the model distance.
#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct SummaryFile {
    pub name: String,
    pub horizon: usize,
    pub eval_interval: usize,
    pub seeds: Vec<u64>,
    pub final_hit_rates: Vec<PolicySummary>,
    pub model_distance_mean: f64,
    pub model_distance_per_seed: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct PolicySummary {
    pub policy: String,
    pub mean_hit_rate: f64,
}

impl From<&ScenarioResult> for SummaryFile {
    fn from(result: &ScenarioResult) -> Self {
        Self {
            name: result.name.clone(),
            horizon: result.horizon,
            eval_interval: result.eval_interval,
            seeds: result.runs.iter().map(|run| run.seed).collect(),
            final_hit_rates: result
                .policies
                .iter()
                .zip(&result.mean_final_hit_rates)
                .map(|(policy, &mean_hit_rate)| PolicySummary {
                    policy: policy.name().to_string(),
                    mean_hit_rate,
                })
                .collect(),
            model_distance_mean: result.mean_model_distance,
            model_distance_per_seed: result.runs.iter().map(|run| run.model_distance).collect(),
        }
    }
}

impl SummaryFile {
    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = fs::read_to_string(path).map_err(|source| ExperimentError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(serde_json::from_str(&text)?)
    }
}

const CHART_COLORS: [&str; 5] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd"];

/// Line chart of mean hit-rate series per policy, one polyline each.
fn render_chart(result: &ScenarioResult) -> String {
    let width = 800.0;
    let height = 480.0;
    let left = 70.0;
    let right = 160.0;
    let top = 40.0;
    let bottom = 50.0;
    let plot_w = width - left - right;
    let plot_h = height - top - bottom;
    let max_x = *result.checkpoints.last().unwrap_or(&1) as f64;

    let x_of = |checkpoint: usize| left + plot_w * checkpoint as f64 / max_x;
    let y_of = |rate: f64| top + plot_h * (1.0 - rate);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{} hit rate</text>\n",
        left + plot_w / 2.0,
        xml_escape(&result.name)
    ));

    // Axes and horizontal gridlines every 0.2.
    for i in 0..=5 {
        let rate = i as f64 / 5.0;
        let y = y_of(rate);
        svg.push_str(&format!(
            "<line x1=\"{left}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"#dddddd\"/>\n",
            left + plot_w
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">{rate:.1}</text>\n",
            left - 8.0,
            y + 4.0
        ));
    }
    svg.push_str(&format!(
        "<line x1=\"{left}\" y1=\"{top}\" x2=\"{left}\" y2=\"{}\" stroke=\"black\"/>\n",
        top + plot_h
    ));
    svg.push_str(&format!(
        "<line x1=\"{left}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        top + plot_h,
        left + plot_w,
        top + plot_h
    ));
    for i in 0..=4 {
        let checkpoint = max_x * i as f64 / 4.0;
        let x = left + plot_w * i as f64 / 4.0;
        svg.push_str(&format!(
            "<text x=\"{x}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
            top + plot_h + 20.0,
            checkpoint as usize
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">rounds</text>\n",
        left + plot_w / 2.0,
        top + plot_h + 40.0
    ));

    for (index, &policy) in result.policies.iter().enumerate() {
        let color = CHART_COLORS[index % CHART_COLORS.len()];
        let series = result.mean_series(policy);
        let points: Vec<String> = result
            .checkpoints
            .iter()
            .zip(&series)
            .map(|(&checkpoint, &rate)| format!("{:.2},{:.2}", x_of(checkpoint), y_of(rate)))
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            points.join(" ")
        ));
        let legend_y = top + 16.0 * index as f64;
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{legend_y}\" x2=\"{}\" y2=\"{legend_y}\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
            left + plot_w + 12.0,
            left + plot_w + 36.0
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
            left + plot_w + 42.0,
            legend_y + 4.0,
            policy.name()
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

fn xml_escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// On-disk shape of a scenario. The `hmg` field is either an inline game or
/// a path to one.
#[derive(Debug, Serialize, Deserialize)]
struct ScenarioFile {
    name: String,
    hmg: HmgRef,
    true_transitions: Vec<Vec<f64>>,
    #[serde(default = "default_horizon")]
    horizon: usize,
    #[serde(default = "default_eval_interval")]
    eval_interval: usize,
    seeds: Vec<u64>,
    #[serde(default)]
    training: TrainingConfig,
    #[serde(default)]
    retrain_at_checkpoints: bool,
    #[serde(default)]
    windowed_hit_rate: bool,
}

fn default_horizon() -> usize {
    10_000
}

fn default_eval_interval() -> usize {
    200
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum HmgRef {
    Path(String),
    Inline(HmgFile),
}

impl ScenarioFile {
    fn into_config(self, base_dir: Option<&Path>) -> Result<ScenarioConfig, ExperimentError> {
        let hmg = match self.hmg {
            HmgRef::Inline(file) => file.try_into()?,
            HmgRef::Path(relative) => {
                let path = match base_dir {
                    Some(dir) => dir.join(&relative),
                    None => PathBuf::from(&relative),
                };
                HiddenMarkovGame::load(&path)?
            }
        };
        let config = ScenarioConfig {
            name: self.name,
            hmg,
            true_transitions: self.true_transitions,
            horizon: self.horizon,
            eval_interval: self.eval_interval,
            seeds: self.seeds,
            training: self.training,
            retrain_at_checkpoints: self.retrain_at_checkpoints,
            windowed_hit_rate: self.windowed_hit_rate,
        };
        config.validate()?;
        Ok(config)
    }
}

impl From<&ScenarioConfig> for ScenarioFile {
    fn from(config: &ScenarioConfig) -> Self {
        Self {
            name: config.name.clone(),
            hmg: HmgRef::Inline(HmgFile::from(&config.hmg)),
            true_transitions: config.true_transitions.clone(),
            horizon: config.horizon,
            eval_interval: config.eval_interval,
            seeds: config.seeds.clone(),
            training: config.training.clone(),
            retrain_at_checkpoints: config.retrain_at_checkpoints,
            windowed_hit_rate: config.windowed_hit_rate,
        }
    }
}
