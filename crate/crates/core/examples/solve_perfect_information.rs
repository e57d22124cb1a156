//! Equilibria of a small perfect-information game.
//!
//! cargo run --example solve_perfect_information -- 3 -3

use liqgame::game::{build_instance, build_payoff_matrix};
use liqgame::solver::{find_pure_equilibria, solve_mixed};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<i64> = std::env::args().skip(1).map(|a| a.parse()).collect::<Result<_, _>>()?;
    let (bi, bj) = match args[..] {
        [a, b] => (a, b),
        _ => (3, -3),
    };
    let instance = build_instance(bi, bj, bi.unsigned_abs().max(bj.unsigned_abs()))?;
    let m = build_payoff_matrix(&instance);
    print!("{}", m.to_csv());

    for eq in find_pure_equilibria(&m) {
        println!("pure: offer {} / capacity {} -> {:?}", m.row_actions[eq.row].quantity, m.col_actions[eq.col].quantity, eq.payoffs);
    }
    for profile in solve_mixed(&m)?.iter().filter(|p| !p.is_pure()) {
        println!("mixed: {profile}");
    }
    Ok(())
}
