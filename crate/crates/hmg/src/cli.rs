//! Command-line surface over the solvers, training, and the scenario runner.
//!
//! Results go to stdout, diagnostics to stderr. Exit codes: 0 on success, 2
//! for input errors (parsing, validation), 3 for I/O failures. The `HMG_LOG`
//! environment variable (`off` | `info` | `debug`, default `off`) controls
//! diagnostic verbosity.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::experiments::{export_result, run_scenario_with_jobs, ScenarioConfig};
use crate::game::BimatrixGame;
use crate::hmg::{HiddenMarkovGame, TransitionInit};
use crate::hmm::{model_distance, trace_csv, HiddenMarkovModel, TrainingConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "hmg",
    about = "Hidden Markov games: equilibrium solvers, type inference, and scenario experiments",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the pure Nash equilibria of a game file; with --mixed also the
    /// 2x2 mixed equilibrium.
    SolveGame {
        /// Game JSON file.
        #[arg(long)]
        game: PathBuf,
        /// Also solve for the mixed equilibrium (2x2 games).
        #[arg(long)]
        mixed: bool,
    },
    /// Reduce a hidden Markov game file to a hidden Markov model.
    BuildHmg {
        /// Hidden Markov game JSON file.
        #[arg(long)]
        hmg: PathBuf,
        /// Optional JSON file with a row-stochastic transition table; without
        /// it a seeded perturbed-uniform table is used.
        #[arg(long)]
        transitions: Option<PathBuf>,
        /// Seed for the perturbed-uniform initialization.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the model here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Infer type transitions from observed opponent actions
    /// (emission-clamped Baum-Welch).
    Train {
        /// Hidden Markov game JSON file.
        #[arg(long)]
        hmg: PathBuf,
        /// JSON array of observation symbol indices.
        #[arg(long)]
        observations: PathBuf,
        #[arg(long, default_value_t = 200)]
        max_iterations: usize,
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
        /// Seed for the transition initialization.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the trained model here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the log-likelihood trace as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Print the distribution of the next observation under a model.
    Predict {
        /// Model JSON file.
        #[arg(long)]
        model: PathBuf,
        /// JSON array of observation symbol indices (may be empty).
        #[arg(long)]
        observations: PathBuf,
    },
    /// Symmetric model distance between two models.
    Distance {
        #[arg(long)]
        model_a: PathBuf,
        #[arg(long)]
        model_b: PathBuf,
        /// Length of the sampled comparison sequences.
        #[arg(long, default_value_t = 10_000)]
        length: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a scenario file and export hit rates, summary, trained model, and
    /// chart.
    RunScenario {
        /// Scenario JSON file.
        #[arg(long)]
        scenario: PathBuf,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
        /// Maximum seeds in flight; defaults to the available cores.
        #[arg(long)]
        jobs: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd)]
enum LogLevel {
    Off,
    Info,
    Debug,
}

fn log_level() -> LogLevel {
    match std::env::var("HMG_LOG").as_deref() {
        Ok("info") => LogLevel::Info,
        Ok("debug") => LogLevel::Debug,
        _ => LogLevel::Off,
    }
}

macro_rules! info {
    ($level:expr, $($arg:tt)*) => {
        if $level >= LogLevel::Info {
            eprintln!("[info] {}", format!($($arg)*));
        }
    };
}

macro_rules! debug {
    ($level:expr, $($arg:tt)*) => {
        if $level >= LogLevel::Debug {
            eprintln!("[debug] {}", format!($($arg)*));
        }
    };
}

/// A failure mapped to its exit code, with the message that goes to stderr.
#[derive(Debug)]
pub struct CliError {
    pub exit_code: i32,
    pub message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        Self {
            exit_code: EXIT_INPUT,
            message: message.into(),
        }
    }

    fn io(message: impl Into<String>) -> Self {
        Self {
            exit_code: EXIT_IO,
            message: message.into(),
        }
    }
}

/// Classify module errors: I/O problems exit 3, everything else is an input
/// error and exits 2.
trait ToCliError {
    fn is_io(&self) -> bool;
}

impl ToCliError for crate::game::GameError {
    fn is_io(&self) -> bool {
        matches!(self, crate::game::GameError::Io { .. })
    }
}

impl ToCliError for crate::hmm::HmmError {
    fn is_io(&self) -> bool {
        matches!(self, crate::hmm::HmmError::Io { .. })
    }
}

impl ToCliError for crate::hmg::HmgError {
    fn is_io(&self) -> bool {
        match self {
            crate::hmg::HmgError::Io { .. } => true,
            crate::hmg::HmgError::Hmm(e) => e.is_io(),
            _ => false,
        }
    }
}

impl ToCliError for crate::experiments::ExperimentError {
    fn is_io(&self) -> bool {
        match self {
            crate::experiments::ExperimentError::Io { .. } => true,
            crate::experiments::ExperimentError::Hmg(e) => e.is_io(),
            crate::experiments::ExperimentError::Seed { source, .. } => source.is_io(),
            _ => false,
        }
    }
}

fn classify<E: ToCliError + std::fmt::Display>(error: E) -> CliError {
    if error.is_io() {
        CliError::io(error.to_string())
    } else {
        CliError::input(error.to_string())
    }
}

/// Parse the process arguments, run the command, and return the exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints help/version on stdout with code 0 and usage
            // errors on stderr with code 2.
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.exit_code
        }
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let level = log_level();
    match cli.command {
        Command::SolveGame { game, mixed } => solve_game(&game, mixed, level),
        Command::BuildHmg {
            hmg,
            transitions,
            seed,
            out,
        } => build_hmg(&hmg, transitions.as_deref(), seed, out.as_deref(), level),
        Command::Train {
            hmg,
            observations,
            max_iterations,
            tolerance,
            seed,
            out,
            trace,
        } => train(
            &hmg,
            &observations,
            max_iterations,
            tolerance,
            seed,
            out.as_deref(),
            trace.as_deref(),
            level,
        ),
        Command::Predict {
            model,
            observations,
        } => predict(&model, &observations, level),
        Command::Distance {
            model_a,
            model_b,
            length,
            seed,
        } => distance(&model_a, &model_b, length, seed),
        Command::RunScenario {
            scenario,
            out,
            jobs,
        } => run_scenario_command(&scenario, &out, jobs, level),
    }
}

fn solve_game(path: &Path, mixed: bool, level: LogLevel) -> Result<(), CliError> {
    let game = BimatrixGame::load(path).map_err(classify)?;
    debug!(
        level,
        "loaded {}x{} game from {}",
        game.n_rows(),
        game.n_cols(),
        path.display()
    );
    // Solve everything before printing anything: a failure must not leave
    // partial output behind.
    let pure = game.pure_nash_equilibria();
    let mixed_profile = if mixed {
        Some(game.mixed_equilibrium_2x2().map_err(classify)?)
    } else {
        None
    };
    let mut out = String::new();
    for (r, c) in pure {
        out.push_str(&format!(
            "pure: ({}, {})\n",
            game.row_strategies().label(r),
            game.col_strategies().label(c)
        ));
    }
    if let Some(eq) = mixed_profile {
        out.push_str(&format!(
            "mixed: p=({:.6},{:.6}) q=({:.6},{:.6})\n",
            eq.row.probability(0),
            eq.row.probability(1),
            eq.col.probability(0),
            eq.col.probability(1)
        ));
        out.push_str(&format!(
            "values: row={:.6} col={:.6}\n",
            eq.row_value, eq.col_value
        ));
    }
    print!("{out}");
    Ok(())
}

fn load_observations(path: &Path) -> Result<Vec<usize>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("failed to read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::input(format!("malformed observations in {}: {e}", path.display())))
}

fn write_or_print(content: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, content)
            .map_err(|e| CliError::io(format!("failed to write {}: {e}", path.display()))),
        None => {
            println!("{content}");
            Ok(())
        }
    }
}

fn build_hmg(
    path: &Path,
    transitions: Option<&Path>,
    seed: u64,
    out: Option<&Path>,
    level: LogLevel,
) -> Result<(), CliError> {
    let hmg = HiddenMarkovGame::load(path).map_err(classify)?;
    let init = match transitions {
        Some(table_path) => {
            let text = fs::read_to_string(table_path).map_err(|e| {
                CliError::io(format!("failed to read {}: {e}", table_path.display()))
            })?;
            let table: Vec<Vec<f64>> = serde_json::from_str(&text).map_err(|e| {
                CliError::input(format!(
                    "malformed transition table in {}: {e}",
                    table_path.display()
                ))
            })?;
            TransitionInit::Matrix(table)
        }
        None => TransitionInit::UniformPerturbed { seed },
    };
    let model = hmg.to_hmm(init).map_err(classify)?;
    info!(
        level,
        "built {}-state model over {} symbols",
        model.n_states(),
        model.n_observations()
    );
    write_or_print(&model.to_json_string(), out)
}

#[allow(clippy::too_many_arguments)]
fn train(
    hmg_path: &Path,
    observations_path: &Path,
    max_iterations: usize,
    tolerance: f64,
    seed: u64,
    out: Option<&Path>,
    trace_path: Option<&Path>,
    level: LogLevel,
) -> Result<(), CliError> {
    let hmg = HiddenMarkovGame::load(hmg_path).map_err(classify)?;
    let observations = load_observations(observations_path)?;
    let config = TrainingConfig {
        max_iterations,
        log_likelihood_tolerance: tolerance,
        seed,
        ..TrainingConfig::default()
    };
    let outcome = hmg
        .infer_transitions(&observations, &config)
        .map_err(classify)?;
    info!(
        level,
        "trained in {} iterations, final log-likelihood {:.6}",
        outcome.log_likelihood_trace.len(),
        outcome.log_likelihood_trace.last().unwrap()
    );
    if let Some(path) = trace_path {
        fs::write(path, trace_csv(&outcome.log_likelihood_trace))
            .map_err(|e| CliError::io(format!("failed to write {}: {e}", path.display())))?;
    }
    write_or_print(&outcome.model.to_json_string(), out)
}

fn predict(model_path: &Path, observations_path: &Path, level: LogLevel) -> Result<(), CliError> {
    let model = HiddenMarkovModel::load(model_path).map_err(classify)?;
    let observations = load_observations(observations_path)?;
    debug!(
        level,
        "predicting after {} observations",
        observations.len()
    );
    let distribution = model
        .predict_next_observation(&observations)
        .map_err(classify)?;
    let mut out = String::new();
    for (index, probability) in distribution.iter().enumerate() {
        let label = model
            .observation_labels()
            .map(|labels| labels[index].clone())
            .unwrap_or_else(|| index.to_string());
        out.push_str(&format!("{label} {probability:.6}\n"));
    }
    print!("{out}");
    Ok(())
}

fn distance(
    model_a_path: &Path,
    model_b_path: &Path,
    length: usize,
    seed: u64,
) -> Result<(), CliError> {
    let a = HiddenMarkovModel::load(model_a_path).map_err(classify)?;
    let b = HiddenMarkovModel::load(model_b_path).map_err(classify)?;
    if length == 0 {
        return Err(CliError::input("length must be positive"));
    }
    let d = model_distance(&a, &b, length, seed).map_err(classify)?;
    println!("{d:.6}");
    Ok(())
}

fn run_scenario_command(
    scenario_path: &Path,
    out_dir: &Path,
    jobs: Option<usize>,
    level: LogLevel,
) -> Result<(), CliError> {
    let config = ScenarioConfig::load(scenario_path).map_err(classify)?;
    let jobs = jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    info!(
        level,
        "running scenario {:?}: horizon {}, {} seeds, {jobs} jobs",
        config.name,
        config.horizon,
        config.seeds.len()
    );
    let result = run_scenario_with_jobs(&config, jobs).map_err(classify)?;
    export_result(&result, out_dir).map_err(classify)?;
    debug!(level, "finished in {:.2?}", result.elapsed);
    let mut out = String::new();
    out.push_str(&format!("scenario: {}\n", result.name));
    for (policy, rate) in result.policies.iter().zip(&result.mean_final_hit_rates) {
        out.push_str(&format!("{policy}: {rate:.6}\n"));
    }
    out.push_str(&format!(
        "model_distance: {:.6}\n",
        result.mean_model_distance
    ));
    print!("{out}");
    Ok(())
}
