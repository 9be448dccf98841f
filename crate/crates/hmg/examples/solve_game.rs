//! Solve normal-form games: enumerate pure Nash equilibria and compute the
//! exact mixed equilibrium of 2x2 games.
//!
//! ```bash
//! cargo run -p hmg --example solve_game
//! ```

use hmg::game::{BimatrixGame, EquilibriumKind};

fn describe(name: &str, game: &BimatrixGame) {
    println!("{name}");
    let pure = game.pure_nash_equilibria();
    if pure.is_empty() {
        println!("  pure equilibria: none");
    }
    for (r, c) in pure {
        println!(
            "  pure equilibrium: ({}, {}) with payoffs {:?}",
            game.row_strategies().label(r),
            game.col_strategies().label(c),
            game.payoff_pair(r, c)
        );
    }
    match game.mixed_equilibrium_2x2() {
        Ok(eq) => {
            let kind = match eq.kind {
                EquilibriumKind::Mixed => "interior mixed",
                EquilibriumKind::Pure => "pure (degenerate mix)",
            };
            println!(
                "  {kind} equilibrium: row=({:.4}, {:.4}) col=({:.4}, {:.4}) values=({:.4}, {:.4})",
                eq.row.probability(0),
                eq.row.probability(1),
                eq.col.probability(0),
                eq.col.probability(1),
                eq.row_value,
                eq.col_value
            );
        }
        Err(e) => println!("  mixed equilibrium: {e}"),
    }
    println!();
}

fn main() {
    // A coordination-style game with two pure equilibria and an interior
    // mix at p = q = 1/3.
    let battle = BimatrixGame::from_tables(
        &["s1", "s2"],
        &["s1", "s2"],
        &[(3.0, 3.0), (2.0, 5.0), (5.0, 2.0), (1.0, 1.0)],
    )
    .unwrap();
    describe("battle of strategies", &battle);

    // No pure equilibrium at all: only the fifty-fifty mix survives.
    let pennies = BimatrixGame::from_tables(
        &["heads", "tails"],
        &["heads", "tails"],
        &[(1.0, -1.0), (-1.0, 1.0), (-1.0, 1.0), (1.0, -1.0)],
    )
    .unwrap();
    describe("matching pennies", &pennies);

    // The three tennis serve profiles.
    describe("tennis: aggressive server", &hmg::tennis::aggressive_game());
    describe("tennis: moderate server", &hmg::tennis::moderate_game());
    describe("tennis: defensive server", &hmg::tennis::defensive_game());
}
