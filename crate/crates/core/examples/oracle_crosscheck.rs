//! Checks every exact equilibrium against the grid search.

use liqgame::game::{build_instance, build_payoff_matrix};
use liqgame::solver::{brute_force_oracle, solve_mixed};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let resolution = 60;
    for n in 1..=3i64 {
        for m in 1..=3i64 {
            let matrix = build_payoff_matrix(&build_instance(n, -m, 3)?);
            let grid = brute_force_oracle(&matrix, resolution)?;
            for eq in solve_mixed(&matrix)? {
                let nearest = grid.iter().map(|g| g.distance_to(&eq)).fold(f64::INFINITY, f64::min);
                println!("({n}, -{m}) {eq}: nearest grid point {nearest:.4}");
            }
        }
    }
    Ok(())
}
