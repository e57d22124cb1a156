//! Quadrant volumes of the published composition tables and of a matrix
//! built from type-pair games.

use liqgame::fixtures;
use liqgame::market::{best_quadrant, fmt1, load_published_matrix, quadrant_analysis, weight_by_priors, TypePairDocument};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = load_published_matrix("final_4x4")?;
    let report = quadrant_analysis(&m)?;
    for q in &report.quadrants {
        println!("{}|{}: {}", q.row_type, q.col_type, fmt1(q.sum));
    }
    println!("total {}, hit ratio {}", fmt1(report.system_total), report.hit_ratio);
    if let Some(best) = best_quadrant(&report) {
        println!("most liquid: {} facing {}", best.row_type, best.col_type);
    }

    let doc: TypePairDocument = serde_json::from_str(&fixtures::read(fixtures::MARKET_CONSTRUCTIVE)?)?;
    let (game, _, _) = doc.into_game()?;
    for large in [0.2, 0.35, 0.5] {
        let prior = [large, 1.0 - large];
        let r = quadrant_analysis(&weight_by_priors(&game, &prior, &prior)?)?;
        println!("large share {large}: total {}", fmt1(r.system_total));
    }
    Ok(())
}
