//! The receiver's round loop: filter the opponent's type from the serve
//! history, predict the next serve, and pick the best reply.
//!
//! ```bash
//! cargo run -p hmg --example predict_next_move
//! ```

use hmg::hmg::{predict_opponent_action, type_posterior, TransitionInit};

fn main() {
    let game = hmg::tennis::tennis_hmg();
    let model = game
        .to_hmm(TransitionInit::Matrix(hmg::tennis::aggressive_transitions()))
        .unwrap();

    // A rally history as the receiver saw it: 0 = Open, 1 = Center.
    let history = vec![0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 1, 1, 0, 1, 1];
    let labels = game.observation_labels();
    let replies = game.type_game(0).row_strategies();

    println!(
        "serve history: {:?}\n",
        history.iter().map(|&s| labels.label(s)).collect::<Vec<_>>()
    );

    for t in [1, 4, 8, history.len()] {
        let prefix = &history[..t];
        let posterior = type_posterior(&model, prefix).unwrap();
        let predicted = predict_opponent_action(&model, prefix).unwrap();
        let reply = game.best_response(&predicted, &posterior).unwrap();
        println!("after {t:>2} serves:");
        print!("  type posterior:");
        for (label, p) in game.informed_types().iter().zip(posterior.probabilities()) {
            print!(" {label}={p:.3}");
        }
        println!("  (most likely: {})", posterior.argmax_label().unwrap());
        println!(
            "  next serve:     P({}) = {:.3}, P({}) = {:.3}",
            labels.label(0),
            predicted[0],
            labels.label(1),
            predicted[1]
        );
        println!("  best reply:     {}\n", replies.label(reply));
    }
}
