//! Simulated hit ratio against the exact value, and rounds to clear
//! under repeated play.

use liqgame::sim::{analytic_hit_ratio, run_simulation, SimConfig, SimMode, StrategySpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = SimConfig {
        trials: 50_000,
        strategy_i: StrategySpec::UniformRandom,
        strategy_j: StrategySpec::UniformRandom,
        seed: 42,
        ..SimConfig::default()
    };
    let report = run_simulation(&config)?;
    let exact = analytic_hit_ratio(config.balance_range_i, config.balance_range_j, config.strategy_i, config.strategy_j)?;
    println!("hit ratio {:.4} (exact {exact:.4}), mean volume {:.1}", report.hit_ratio, report.mean_volume_per_trial);

    let repeated = run_simulation(&SimConfig {
        mode: SimMode::Repeated,
        ..config
    })?;
    print!("{}", repeated.histogram_csv());
    println!("uncleared: {}", repeated.uncleared_trials);
    Ok(())
}
