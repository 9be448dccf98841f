//! Independent oracles shared by the integration suites. Everything here
//! recomputes results by brute force (path enumeration, grid refinement,
//! power iteration) without touching the library's inference code paths.

#![allow(dead_code)]

use hmg::game::BimatrixGame;
use hmg::hmm::HiddenMarkovModel;

/// P(obs | model) by exhaustive summation over all hidden paths.
pub fn enumerated_probability(model: &HiddenMarkovModel, obs: &[usize]) -> f64 {
    assert!(!obs.is_empty());
    let n = model.n_states();
    let mut total = 0.0;
    for path_id in 0..n.pow(obs.len() as u32) {
        let mut id = path_id;
        let mut path = Vec::with_capacity(obs.len());
        for _ in 0..obs.len() {
            path.push(id % n);
            id /= n;
        }
        let mut p = model.initial()[path[0]] * model.emissions()[path[0]][obs[0]];
        for t in 1..obs.len() {
            p *= model.transitions()[path[t - 1]][path[t]] * model.emissions()[path[t]][obs[t]];
        }
        total += p;
    }
    total
}

/// P(last state | obs) by enumerating joint path probabilities.
pub fn enumerated_filter(model: &HiddenMarkovModel, obs: &[usize]) -> Vec<f64> {
    let n = model.n_states();
    let mut joint = vec![0.0; n];
    for path_id in 0..n.pow(obs.len() as u32) {
        let mut id = path_id;
        let mut path = Vec::with_capacity(obs.len());
        for _ in 0..obs.len() {
            path.push(id % n);
            id /= n;
        }
        let mut p = model.initial()[path[0]] * model.emissions()[path[0]][obs[0]];
        for t in 1..obs.len() {
            p *= model.transitions()[path[t - 1]][path[t]] * model.emissions()[path[t]][obs[t]];
        }
        joint[*path.last().unwrap()] += p;
    }
    let total: f64 = joint.iter().sum();
    joint.into_iter().map(|p| p / total).collect()
}

/// P(next symbol | obs) as a ratio of enumerated sequence probabilities.
pub fn enumerated_next_observation(model: &HiddenMarkovModel, obs: &[usize]) -> Vec<f64> {
    let denominator = enumerated_probability(model, obs);
    (0..model.n_observations())
        .map(|symbol| {
            let mut extended = obs.to_vec();
            extended.push(symbol);
            enumerated_probability(model, &extended) / denominator
        })
        .collect()
}

/// All observation sequences of the given length over `n_symbols`.
pub fn all_sequences(n_symbols: usize, length: usize) -> Vec<Vec<usize>> {
    let mut sequences = vec![Vec::new()];
    for _ in 0..length {
        sequences = sequences
            .into_iter()
            .flat_map(|seq| {
                (0..n_symbols).map(move |s| {
                    let mut next = seq.clone();
                    next.push(s);
                    next
                })
            })
            .collect();
    }
    sequences
}

/// The column mix that equalizes the row player's two pure payoffs and the
/// row mix that equalizes the column player's, found by coarse-to-fine grid
/// refinement down to a 1e-6 step. Returns (p_row0, q_col0).
pub fn grid_refined_indifference_mix(game: &BimatrixGame) -> (f64, f64) {
    assert_eq!(game.n_rows(), 2);
    assert_eq!(game.n_cols(), 2);
    let row_gap = |q: f64| {
        let row0 = q * game.row_payoff(0, 0) + (1.0 - q) * game.row_payoff(0, 1);
        let row1 = q * game.row_payoff(1, 0) + (1.0 - q) * game.row_payoff(1, 1);
        (row0 - row1).abs()
    };
    let col_gap = |p: f64| {
        let col0 = p * game.col_payoff(0, 0) + (1.0 - p) * game.col_payoff(1, 0);
        let col1 = p * game.col_payoff(0, 1) + (1.0 - p) * game.col_payoff(1, 1);
        (col0 - col1).abs()
    };
    (refine_argmin(col_gap), refine_argmin(row_gap))
}

/// Both players' indifference gaps at a candidate profile (p, q).
pub fn indifference_gaps(game: &BimatrixGame, p: f64, q: f64) -> (f64, f64) {
    let row0 = q * game.row_payoff(0, 0) + (1.0 - q) * game.row_payoff(0, 1);
    let row1 = q * game.row_payoff(1, 0) + (1.0 - q) * game.row_payoff(1, 1);
    let col0 = p * game.col_payoff(0, 0) + (1.0 - p) * game.col_payoff(1, 0);
    let col1 = p * game.col_payoff(0, 1) + (1.0 - p) * game.col_payoff(1, 1);
    ((row0 - row1).abs(), (col0 - col1).abs())
}

fn refine_argmin(gap: impl Fn(f64) -> f64) -> f64 {
    let mut lo = 0.0_f64;
    let mut hi = 1.0_f64;
    let mut best = 0.0;
    let mut step = 1e-2;
    loop {
        let mut best_gap = f64::INFINITY;
        let mut x = lo;
        while x <= hi + step / 2.0 {
            let g = gap(x.clamp(0.0, 1.0));
            if g < best_gap {
                best_gap = g;
                best = x.clamp(0.0, 1.0);
            }
            x += step;
        }
        if step <= 1e-6 {
            return best;
        }
        lo = (best - 2.0 * step).max(0.0);
        hi = (best + 2.0 * step).min(1.0);
        step /= 100.0;
    }
}

/// Stationary distribution of a row-stochastic matrix by power iteration.
pub fn stationary_distribution(transitions: &[Vec<f64>]) -> Vec<f64> {
    let n = transitions.len();
    let mut pi = vec![1.0 / n as f64; n];
    for _ in 0..20_000 {
        let mut next = vec![0.0; n];
        for (i, &mass) in pi.iter().enumerate() {
            for j in 0..n {
                next[j] += mass * transitions[i][j];
            }
        }
        pi = next;
    }
    pi
}

/// Exhaustive unilateral-deviation check for a pure strategy cell.
pub fn survives_deviation_check(game: &BimatrixGame, row: usize, col: usize) -> bool {
    let row_best = (0..game.n_rows()).all(|r| game.row_payoff(row, col) >= game.row_payoff(r, col));
    let col_best = (0..game.n_cols()).all(|c| game.col_payoff(row, col) >= game.col_payoff(row, c));
    row_best && col_best
}

/// Fixture set of 3-state, 2-symbol models for the brute-force equivalence
/// checks: the shipped tennis generator, a sharp-emission model, and a
/// lopsided one.
pub fn fixture_models() -> Vec<(&'static str, HiddenMarkovModel)> {
    let tennis = hmg::tennis::tennis_hmg()
        .to_hmm(hmg::hmg::TransitionInit::Matrix(
            hmg::tennis::aggressive_transitions(),
        ))
        .unwrap();
    let sharp = HiddenMarkovModel::new(
        vec![
            vec![0.5, 0.3, 0.2],
            vec![0.2, 0.5, 0.3],
            vec![0.3, 0.2, 0.5],
        ],
        vec![vec![0.9, 0.1], vec![0.5, 0.5], vec![0.2, 0.8]],
        vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
    )
    .unwrap();
    let lopsided = HiddenMarkovModel::new(
        vec![
            vec![0.85, 0.1, 0.05],
            vec![0.05, 0.9, 0.05],
            vec![0.1, 0.1, 0.8],
        ],
        vec![vec![0.7, 0.3], vec![0.45, 0.55], vec![0.1, 0.9]],
        vec![0.7, 0.2, 0.1],
    )
    .unwrap();
    vec![("tennis", tennis), ("sharp", sharp), ("lopsided", lopsided)]
}
