//! Weakly and strictly dominated actions for each player.

use liqgame::game::{build_instance, build_payoff_matrix, PlayerId};
use liqgame::solver::dominated_actions;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (bi, bj) in [(2, -2), (3, -3), (4, -2)] {
        let m = build_payoff_matrix(&build_instance(bi, bj, 4)?);
        println!("B = ({bi}, {bj})");
        for player in [PlayerId::I, PlayerId::J] {
            let labels = if player == PlayerId::I { &m.row_actions } else { &m.col_actions };
            for d in dominated_actions(&m, player) {
                println!(
                    "  player {player}: {} dominated by {} ({:?})",
                    labels[d.dominated].quantity, labels[d.dominating].quantity, d.strictness
                );
            }
        }
    }
    Ok(())
}
