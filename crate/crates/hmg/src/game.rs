//! Two-player normal-form games: payoff tables, pure Nash equilibria, and the
//! closed-form mixed equilibrium for 2x2 games.
//!
//! Payoff cells are `(row payoff, column payoff)` pairs. Equilibrium mixes
//! returned by [`BimatrixGame::mixed_equilibrium_2x2`] are exact solutions of
//! the indifference equations, not fixed-point iterates.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Probability vectors must sum to one within this tolerance.
pub const DISTRIBUTION_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum GameError {
    #[error("invalid strategy set: {0}")]
    InvalidStrategySet(String),
    #[error("invalid game: {0}")]
    InvalidGame(String),
    #[error("invalid mixed strategy: {0}")]
    InvalidDistribution(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("mixed equilibrium solver requires a 2x2 game, got {rows}x{cols}")]
    NotTwoByTwo { rows: usize, cols: usize },
    #[error("degenerate game: indifference system is singular and no pure equilibrium exists")]
    DegenerateGame,
    #[error("malformed game file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("failed to access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// An ordered set of uniquely named strategies for one player.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategySet {
    labels: Vec<String>,
}

impl StrategySet {
    pub fn new<I, S>(labels: I) -> Result<Self, GameError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(GameError::InvalidStrategySet(
                "a strategy set needs at least one strategy".into(),
            ));
        }
        for (i, label) in labels.iter().enumerate() {
            if labels[..i].contains(label) {
                return Err(GameError::InvalidStrategySet(format!(
                    "duplicate strategy label {label:?}"
                )));
            }
        }
        Ok(Self { labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false // enforced non-empty at construction
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Index of a label, if present. Together with [`Self::label`] this is a
    /// bijection between indices and labels.
    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// Which side of the bimatrix a mixed strategy belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Owner {
    Row,
    Col,
}

/// A probability distribution over one player's strategies.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedStrategy {
    owner: Owner,
    probabilities: Vec<f64>,
}

impl MixedStrategy {
    pub fn new(owner: Owner, probabilities: Vec<f64>) -> Result<Self, GameError> {
        if probabilities.is_empty() {
            return Err(GameError::InvalidDistribution(
                "empty probability vector".into(),
            ));
        }
        for &p in &probabilities {
            if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                return Err(GameError::InvalidDistribution(format!(
                    "probability {p} outside [0, 1]"
                )));
            }
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > DISTRIBUTION_TOLERANCE {
            return Err(GameError::InvalidDistribution(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        Ok(Self {
            owner,
            probabilities,
        })
    }

    /// All mass on a single strategy.
    pub fn point_mass(owner: Owner, index: usize, len: usize) -> Result<Self, GameError> {
        if index >= len {
            return Err(GameError::InvalidDistribution(format!(
                "point mass index {index} out of range for {len} strategies"
            )));
        }
        let mut probabilities = vec![0.0; len];
        probabilities[index] = 1.0;
        Self::new(owner, probabilities)
    }

    pub fn owner(&self) -> Owner {
        self.owner
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.probabilities[index]
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquilibriumKind {
    Pure,
    Mixed,
}

/// An equilibrium strategy pair together with both players' expected payoffs.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumProfile {
    pub row: MixedStrategy,
    pub col: MixedStrategy,
    pub row_value: f64,
    pub col_value: f64,
    pub kind: EquilibriumKind,
}

/// A finite two-player game in normal form.
#[derive(Debug, Clone, PartialEq)]
pub struct BimatrixGame {
    row_strategies: StrategySet,
    col_strategies: StrategySet,
    /// `payoffs[r][c] = (row payoff, column payoff)`.
    payoffs: Vec<Vec<(f64, f64)>>,
}

impl BimatrixGame {
    pub fn new(
        row_strategies: StrategySet,
        col_strategies: StrategySet,
        payoffs: Vec<Vec<(f64, f64)>>,
    ) -> Result<Self, GameError> {
        if payoffs.len() != row_strategies.len() {
            return Err(GameError::InvalidGame(format!(
                "payoff table has {} rows, strategy set has {}",
                payoffs.len(),
                row_strategies.len()
            )));
        }
        for (r, row) in payoffs.iter().enumerate() {
            if row.len() != col_strategies.len() {
                return Err(GameError::InvalidGame(format!(
                    "payoff row {r} has {} cells, expected {}",
                    row.len(),
                    col_strategies.len()
                )));
            }
            for &(u_row, u_col) in row {
                if !u_row.is_finite() || !u_col.is_finite() {
                    return Err(GameError::InvalidGame(format!(
                        "non-finite payoff in row {r}"
                    )));
                }
            }
        }
        Ok(Self {
            row_strategies,
            col_strategies,
            payoffs,
        })
    }

    /// Build a game from label lists and a row-major flat list of payoff pairs.
    pub fn from_tables<S: Into<String> + Clone>(
        row_labels: &[S],
        col_labels: &[S],
        cells: &[(f64, f64)],
    ) -> Result<Self, GameError> {
        let rows = StrategySet::new(row_labels.iter().cloned())?;
        let cols = StrategySet::new(col_labels.iter().cloned())?;
        if cells.len() != rows.len() * cols.len() {
            return Err(GameError::InvalidGame(format!(
                "expected {} payoff cells, got {}",
                rows.len() * cols.len(),
                cells.len()
            )));
        }
        let payoffs = cells
            .chunks(cols.len())
            .map(|chunk| chunk.to_vec())
            .collect();
        Self::new(rows, cols, payoffs)
    }

    pub fn n_rows(&self) -> usize {
        self.row_strategies.len()
    }

    pub fn n_cols(&self) -> usize {
        self.col_strategies.len()
    }

    pub fn row_strategies(&self) -> &StrategySet {
        &self.row_strategies
    }

    pub fn col_strategies(&self) -> &StrategySet {
        &self.col_strategies
    }

    pub fn row_payoff(&self, row: usize, col: usize) -> f64 {
        self.payoffs[row][col].0
    }

    pub fn col_payoff(&self, row: usize, col: usize) -> f64 {
        self.payoffs[row][col].1
    }

    pub fn payoff_pair(&self, row: usize, col: usize) -> (f64, f64) {
        self.payoffs[row][col]
    }

    /// All cells where neither player gains from a unilateral deviation.
    ///
    /// Weak equilibria (ties) are included; the list is in row-major order and
    /// may be empty.
    pub fn pure_nash_equilibria(&self) -> Vec<(usize, usize)> {
        let mut cells = Vec::new();
        for r in 0..self.n_rows() {
            for c in 0..self.n_cols() {
                let row_best =
                    (0..self.n_rows()).all(|r2| self.row_payoff(r, c) >= self.row_payoff(r2, c));
                let col_best =
                    (0..self.n_cols()).all(|c2| self.col_payoff(r, c) >= self.col_payoff(r, c2));
                if row_best && col_best {
                    cells.push((r, c));
                }
            }
        }
        cells
    }

    /// Expected payoffs for both players under a pair of mixed strategies.
    pub fn expected_payoffs(
        &self,
        row: &MixedStrategy,
        col: &MixedStrategy,
    ) -> Result<(f64, f64), GameError> {
        if !matches!(row.owner(), Owner::Row) || !matches!(col.owner(), Owner::Col) {
            return Err(GameError::DimensionMismatch(
                "expected a row-owned and a column-owned strategy".into(),
            ));
        }
        if row.len() != self.n_rows() || col.len() != self.n_cols() {
            return Err(GameError::DimensionMismatch(format!(
                "strategies of size {}x{} against a {}x{} game",
                row.len(),
                col.len(),
                self.n_rows(),
                self.n_cols()
            )));
        }
        let mut row_value = 0.0;
        let mut col_value = 0.0;
        for r in 0..self.n_rows() {
            for c in 0..self.n_cols() {
                let weight = row.probability(r) * col.probability(c);
                row_value += weight * self.row_payoff(r, c);
                col_value += weight * self.col_payoff(r, c);
            }
        }
        Ok((row_value, col_value))
    }

    /// Equilibrium of a 2x2 game.
    ///
    /// Returns the interior completely mixed equilibrium whenever one exists:
    /// the column mix makes the row player indifferent between rows and the
    /// row mix makes the column player indifferent between columns. Otherwise
    /// falls back to the first pure equilibrium in row-major order, expressed
    /// as point masses. A singular indifference system with no pure
    /// equilibrium is reported as [`GameError::DegenerateGame`].
    pub fn mixed_equilibrium_2x2(&self) -> Result<EquilibriumProfile, GameError> {
        if self.n_rows() != 2 || self.n_cols() != 2 {
            return Err(GameError::NotTwoByTwo {
                rows: self.n_rows(),
                cols: self.n_cols(),
            });
        }
        let r = |i: usize, j: usize| self.row_payoff(i, j);
        let c = |i: usize, j: usize| self.col_payoff(i, j);

        // q is the column player's weight on column 0, chosen so the row
        // player's two rows pay the same; p is the row player's weight on
        // row 0, chosen so the column player's two columns pay the same.
        let q_den = r(0, 0) - r(0, 1) - r(1, 0) + r(1, 1);
        let p_den = c(0, 0) - c(1, 0) - c(0, 1) + c(1, 1);
        if q_den != 0.0 && p_den != 0.0 {
            let q = (r(1, 1) - r(0, 1)) / q_den;
            let p = (c(1, 1) - c(1, 0)) / p_den;
            if 0.0 < q && q < 1.0 && 0.0 < p && p < 1.0 {
                let row = MixedStrategy::new(Owner::Row, vec![p, 1.0 - p])?;
                let col = MixedStrategy::new(Owner::Col, vec![q, 1.0 - q])?;
                let (row_value, col_value) = self.expected_payoffs(&row, &col)?;
                return Ok(EquilibriumProfile {
                    row,
                    col,
                    row_value,
                    col_value,
                    kind: EquilibriumKind::Mixed,
                });
            }
        }
        if let Some(&(r0, c0)) = self.pure_nash_equilibria().first() {
            let row = MixedStrategy::point_mass(Owner::Row, r0, 2)?;
            let col = MixedStrategy::point_mass(Owner::Col, c0, 2)?;
            let (row_value, col_value) = self.payoff_pair(r0, c0);
            return Ok(EquilibriumProfile {
                row,
                col,
                row_value,
                col_value,
                kind: EquilibriumKind::Pure,
            });
        }
        Err(GameError::DegenerateGame)
    }

    pub fn from_json_str(json: &str) -> Result<Self, GameError> {
        let file: GameFile = serde_json::from_str(json)?;
        file.try_into()
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&GameFile::from(self)).expect("game serialization")
    }

    pub fn load(path: &Path) -> Result<Self, GameError> {
        let text = fs::read_to_string(path).map_err(|source| GameError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), GameError> {
        fs::write(path, self.to_json_string()).map_err(|source| GameError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

/// On-disk shape of a game: strategy label arrays plus a row-major list of
/// `[row payoff, column payoff]` pairs.
#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct GameFile {
    pub row_strategies: Vec<String>,
    pub col_strategies: Vec<String>,
    pub payoffs: Vec<[f64; 2]>,
}

impl From<&BimatrixGame> for GameFile {
    fn from(game: &BimatrixGame) -> Self {
        let payoffs = (0..game.n_rows())
            .flat_map(|r| (0..game.n_cols()).map(move |c| (r, c)))
            .map(|(r, c)| [game.row_payoff(r, c), game.col_payoff(r, c)])
            .collect();
        Self {
            row_strategies: game.row_strategies.labels.clone(),
            col_strategies: game.col_strategies.labels.clone(),
            payoffs,
        }
    }
}

impl TryFrom<GameFile> for BimatrixGame {
    type Error = GameError;

    fn try_from(file: GameFile) -> Result<Self, GameError> {
        let cells: Vec<(f64, f64)> = file.payoffs.iter().map(|p| (p[0], p[1])).collect();
        BimatrixGame::from_tables(&file.row_strategies, &file.col_strategies, &cells)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// 2x2 game with two pure equilibria on the off-diagonal and an interior
    /// mixed equilibrium at p = q = 1/3.
    fn battle_game() -> BimatrixGame {
        BimatrixGame::from_tables(
            &["s1", "s2"],
            &["s1", "s2"],
            &[(3.0, 3.0), (2.0, 5.0), (5.0, 2.0), (1.0, 1.0)],
        )
        .unwrap()
    }

    fn matching_pennies() -> BimatrixGame {
        BimatrixGame::from_tables(
            &["heads", "tails"],
            &["heads", "tails"],
            &[(1.0, -1.0), (-1.0, 1.0), (-1.0, 1.0), (1.0, -1.0)],
        )
        .unwrap()
    }

    #[test]
    fn pure_equilibria_off_diagonal() {
        assert_eq!(battle_game().pure_nash_equilibria(), vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn pure_equilibria_dominant_cell() {
        // (0, 0) strictly dominates; every other cell has a strictly
        // profitable deviation.
        let game = BimatrixGame::from_tables(
            &["a", "b"],
            &["x", "y"],
            &[(2.0, 2.0), (1.0, 0.0), (0.0, 1.0), (0.0, 0.0)],
        )
        .unwrap();
        assert_eq!(game.pure_nash_equilibria(), vec![(0, 0)]);
    }

    #[test]
    fn weak_ties_count_as_equilibria() {
        // All-zero payoffs except one cell: the zero corner survives the
        // weak (>=) deviation check too.
        let game = BimatrixGame::from_tables(
            &["a", "b"],
            &["x", "y"],
            &[(1.0, 1.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0)],
        )
        .unwrap();
        assert_eq!(game.pure_nash_equilibria(), vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn matching_pennies_has_no_pure_equilibrium() {
        // Exhaustive deviation check over all four cells gives the same
        // answer: every cell has a profitable unilateral deviation.
        let game = matching_pennies();
        assert!(game.pure_nash_equilibria().is_empty());
        for r in 0..2 {
            for c in 0..2 {
                let row_best = (0..2).all(|r2| game.row_payoff(r, c) >= game.row_payoff(r2, c));
                let col_best = (0..2).all(|c2| game.col_payoff(r, c) >= game.col_payoff(r, c2));
                assert!(!(row_best && col_best));
            }
        }
    }

    #[test]
    fn pure_equilibria_survive_deviation_check() {
        let game = battle_game();
        for (r, c) in game.pure_nash_equilibria() {
            assert!((0..2).all(|r2| game.row_payoff(r, c) >= game.row_payoff(r2, c)));
            assert!((0..2).all(|c2| game.col_payoff(r, c) >= game.col_payoff(r, c2)));
        }
    }

    #[test]
    fn interior_mixed_equilibrium_one_third() {
        let eq = battle_game().mixed_equilibrium_2x2().unwrap();
        assert_eq!(eq.kind, EquilibriumKind::Mixed);
        assert!((eq.row.probability(0) - 1.0 / 3.0).abs() < 1e-12);
        assert!((eq.col.probability(0) - 1.0 / 3.0).abs() < 1e-12);
        assert!((eq.row_value - 7.0 / 3.0).abs() < 1e-12);
        assert!((eq.col_value - 7.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn mixed_equilibrium_is_deviation_proof() {
        for game in [battle_game(), matching_pennies()] {
            let eq = game.mixed_equilibrium_2x2().unwrap();
            for r in 0..2 {
                let pure = MixedStrategy::point_mass(Owner::Row, r, 2).unwrap();
                let (dev, _) = game.expected_payoffs(&pure, &eq.col).unwrap();
                assert!(dev <= eq.row_value + 1e-9);
            }
            for c in 0..2 {
                let pure = MixedStrategy::point_mass(Owner::Col, c, 2).unwrap();
                let (_, dev) = game.expected_payoffs(&eq.row, &pure).unwrap();
                assert!(dev <= eq.col_value + 1e-9);
            }
        }
    }

    #[test]
    fn interior_equilibrium_makes_both_players_indifferent() {
        let game = battle_game();
        let eq = game.mixed_equilibrium_2x2().unwrap();
        let row0 = MixedStrategy::point_mass(Owner::Row, 0, 2).unwrap();
        let row1 = MixedStrategy::point_mass(Owner::Row, 1, 2).unwrap();
        let (v0, _) = game.expected_payoffs(&row0, &eq.col).unwrap();
        let (v1, _) = game.expected_payoffs(&row1, &eq.col).unwrap();
        assert!((v0 - v1).abs() < 1e-9);
        let col0 = MixedStrategy::point_mass(Owner::Col, 0, 2).unwrap();
        let col1 = MixedStrategy::point_mass(Owner::Col, 1, 2).unwrap();
        let (_, w0) = game.expected_payoffs(&eq.row, &col0).unwrap();
        let (_, w1) = game.expected_payoffs(&eq.row, &col1).unwrap();
        assert!((w0 - w1).abs() < 1e-9);
    }

    #[test]
    fn payoff_shift_leaves_equilibrium_unchanged() {
        let base = battle_game();
        let shifted = BimatrixGame::from_tables(
            &["s1", "s2"],
            &["s1", "s2"],
            &[(13.0, 3.0), (12.0, 5.0), (15.0, 2.0), (11.0, 1.0)],
        )
        .unwrap();
        let a = base.mixed_equilibrium_2x2().unwrap();
        let b = shifted.mixed_equilibrium_2x2().unwrap();
        for i in 0..2 {
            assert!((a.row.probability(i) - b.row.probability(i)).abs() < 1e-9);
            assert!((a.col.probability(i) - b.col.probability(i)).abs() < 1e-9);
        }
    }

    #[test]
    fn dominant_column_yields_pure_profile() {
        // Column 0 strictly dominates for the column player; no interior mix.
        let game = BimatrixGame::from_tables(
            &["a", "b"],
            &["x", "y"],
            &[(2.0, 5.0), (0.0, 1.0), (1.0, 4.0), (3.0, 0.0)],
        )
        .unwrap();
        let eq = game.mixed_equilibrium_2x2().unwrap();
        assert_eq!(eq.kind, EquilibriumKind::Pure);
        assert_eq!(eq.col.probability(0), 1.0);
    }

    #[test]
    fn expected_payoffs_select_cells_under_point_masses() {
        let game = battle_game();
        let row = MixedStrategy::point_mass(Owner::Row, 0, 2).unwrap();
        let col = MixedStrategy::point_mass(Owner::Col, 1, 2).unwrap();
        assert_eq!(game.expected_payoffs(&row, &col).unwrap(), (2.0, 5.0));
    }

    #[test]
    fn equilibrium_value_matches_all_pure_deviations() {
        let game = battle_game();
        let eq = game.mixed_equilibrium_2x2().unwrap();
        for r in 0..2 {
            let pure = MixedStrategy::point_mass(Owner::Row, r, 2).unwrap();
            let (dev, _) = game.expected_payoffs(&pure, &eq.col).unwrap();
            assert!((dev - eq.row_value).abs() < 1e-12);
        }
        for c in 0..2 {
            let pure = MixedStrategy::point_mass(Owner::Col, c, 2).unwrap();
            let (_, dev) = game.expected_payoffs(&eq.row, &pure).unwrap();
            assert!((dev - eq.col_value).abs() < 1e-12);
        }
    }

    #[test]
    fn expected_payoffs_reject_wrong_dimensions() {
        let game = battle_game();
        let row = MixedStrategy::new(Owner::Row, vec![0.5, 0.25, 0.25]).unwrap();
        let col = MixedStrategy::point_mass(Owner::Col, 0, 2).unwrap();
        assert!(matches!(
            game.expected_payoffs(&row, &col),
            Err(GameError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn strategy_sets_reject_duplicates_and_empties() {
        assert!(StrategySet::new(["a", "a"]).is_err());
        assert!(StrategySet::new(Vec::<String>::new()).is_err());
    }

    #[test]
    fn mixed_strategy_validation() {
        assert!(MixedStrategy::new(Owner::Row, vec![0.5, 0.6]).is_err());
        assert!(MixedStrategy::new(Owner::Row, vec![1.2, -0.2]).is_err());
        assert!(MixedStrategy::new(Owner::Row, vec![0.25, 0.75]).is_ok());
    }

    #[test]
    fn json_round_trip() {
        let game = battle_game();
        let back = BimatrixGame::from_json_str(&game.to_json_string()).unwrap();
        assert_eq!(game, back);
    }

    #[test]
    fn json_rejects_wrong_cell_count() {
        let json =
            r#"{"row_strategies":["a","b"],"col_strategies":["x","y"],"payoffs":[[1,1],[2,2]]}"#;
        assert!(BimatrixGame::from_json_str(json).is_err());
    }
}
