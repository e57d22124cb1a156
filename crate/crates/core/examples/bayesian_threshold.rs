//! Prior threshold when player 1 does not know whether it faces a large
//! or a small bank.

use liqgame::bayes::{best_response, indifference_threshold, BayesDocument, TypeSpace};
use liqgame::fixtures;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let doc: BayesDocument = serde_json::from_str(&fixtures::read(fixtures::BAYES_LARGE_SMALL)?)?;
    let (game, space, _) = doc.into_game()?;
    let responses = game.dominant_responses().expect("every type has a dominant strategy");

    let sol = indifference_threshold(&game, &space, &responses)?;
    println!("player 2 plays {:?}", sol.per_type_strategy_j);
    println!(
        "threshold p* = {:.6}: {} above, {} below",
        sol.threshold_p, sol.strategy_i_above, sol.strategy_i_below
    );

    for p in [0.2, 0.35, 5.0 / 9.0, 0.8] {
        let (best, values) = best_response(&game, &TypeSpace::new(space.types.clone(), vec![p, 1.0 - p])?, &responses)?;
        println!("p = {p:.3}: best {best}, {values:?}");
    }
    Ok(())
}
