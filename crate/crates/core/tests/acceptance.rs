//! Acceptance checks. Runs without the libtest harness so every criterion
//! prints a PASS or FAIL line even when all of them pass.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use liqgame::exact::{frac, parse_fraction, Rational};
use liqgame::game::{build_instance, build_payoff_matrix, GameInstance, PayoffMatrix};
use liqgame::lp::{max_transfer, TransferProblem};
use liqgame::market::tenths;
use liqgame::report;
use liqgame::sim::{analytic_hit_ratio, run_simulation, SimConfig, StrategySpec};
use liqgame::solver::{brute_force_oracle, find_pure_equilibria, solve_mixed, verify_equilibrium, GridProfile};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Outcome = Result<String, String>;

fn cli(args: &[&str]) -> (String, Duration) {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_liqgame"))
        .args(args)
        .output()
        .expect("spawn liqgame");
    let elapsed = start.elapsed();
    assert!(out.status.success(), "liqgame {args:?} exited with {}", out.status);
    (String::from_utf8(out.stdout).expect("utf-8"), elapsed)
}

fn check(cond: bool, what: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn fractions(v: &Value) -> Vec<Rational> {
    v.as_array()
        .expect("array")
        .iter()
        .map(|s| parse_fraction(s.as_str().expect("fraction string")).expect("fraction"))
        .collect()
}

fn has_profile(report: &Value, p: &[Rational], q: &[Rational]) -> bool {
    report["mixed_equilibria"]
        .as_array()
        .expect("mixed list")
        .iter()
        .any(|e| fractions(&e["probs_i"]) == p && fractions(&e["probs_j"]) == q)
}

fn pure_payoffs(report: &Value) -> Vec<(i64, i64)> {
    report["pure_equilibria"]
        .as_array()
        .expect("pure list")
        .iter()
        .map(|e| (e["payoffs"][0].as_i64().unwrap(), e["payoffs"][1].as_i64().unwrap()))
        .collect()
}

fn golden_2x2() -> Outcome {
    let (out, elapsed) = cli(&["solve", "--bi", "2", "--bj", "-2"]);
    let r: Value = serde_json::from_str(&out).map_err(|e| e.to_string())?;
    check(
        r["matrix"] == serde_json::json!([[[2, 2], [0, 0]], [[1, 1], [1, 1]]]),
        format!("matrix {}", r["matrix"]),
    )?;
    check(pure_payoffs(&r) == [(2, 2), (1, 1)], format!("pure {:?}", pure_payoffs(&r)))?;
    let (zero, one, half) = (frac(0, 1), frac(1, 1), frac(1, 2));
    check(
        has_profile(&r, &[zero, one], &[half.clone(), half]),
        "mixed p=(0,1), q=(1/2,1/2) missing",
    )?;
    check(elapsed < Duration::from_secs(1), format!("took {elapsed:?}"))?;
    Ok(format!("matrix, pure NE and mixed profile exact in {elapsed:.2?}"))
}

fn golden_3x3() -> Outcome {
    let (out, elapsed) = cli(&["solve", "--bi", "3", "--bj", "-3"]);
    let r: Value = serde_json::from_str(&out).map_err(|e| e.to_string())?;
    check(pure_payoffs(&r) == [(3, 3), (2, 2), (1, 1)], format!("pure {:?}", pure_payoffs(&r)))?;
    let diagonal = r["pure_equilibria"]
        .as_array()
        .unwrap()
        .iter()
        .all(|e| e["row"] == e["col"]);
    check(diagonal, "pure equilibria off the diagonal")?;
    check(
        has_profile(
            &r,
            &[frac(0, 1), frac(0, 1), frac(1, 1)],
            &[frac(1, 3), frac(1, 6), frac(1, 2)],
        ),
        "mixed p=(0,0,1), q=(1/3,1/6,1/2) missing",
    )?;
    check(elapsed < Duration::from_secs(1), format!("took {elapsed:?}"))?;
    Ok(format!("diagonal NE and q=(1/3,1/6,1/2) exact in {elapsed:.2?}"))
}

fn bayes_threshold() -> Outcome {
    let (out, _) = cli(&["bayes"]);
    let r: Value = serde_json::from_str(&out).map_err(|e| e.to_string())?;
    for d in r["dominant_strategies"].as_array().unwrap() {
        check(d["strategy"] == "high", format!("type {} dominant {}", d["type"], d["strategy"]))?;
    }
    let p = r["solution"]["threshold_p"].as_f64().unwrap();
    check((p - 5.0 / 9.0).abs() <= 1e-12, format!("threshold {p}"))?;
    check(r["solution"]["exterior"] == false, "threshold flagged exterior")?;
    Ok(format!("both types high, p* = {p}"))
}

fn market_aggregates() -> Outcome {
    let (out, _) = cli(&["market", "--published", "final_4x4"]);
    let r: Value = serde_json::from_str(&out).map_err(|e| e.to_string())?;
    let t = |v: &Value| tenths(v.as_f64().expect("number"));
    check(t(&r["system_total"]) == 411, format!("total {}", r["system_total"]))?;
    check(t(&r["quadrants"]["L|L"]) == 97, format!("L|L {}", r["quadrants"]["L|L"]))?;
    check(t(&r["quadrants"]["s|s"]) == 83, format!("s|s {}", r["quadrants"]["s|s"]))?;
    let best = &r["best_quadrant"];
    check(
        best["row_type"] == "s" && best["col_type"] == "L" && t(&best["sum"]) == 186,
        format!("best {best}"),
    )?;
    check(r["hit_ratio"].as_f64() == Some(0.75), format!("hit ratio {}", r["hit_ratio"]))?;
    Ok("41.1 / 9.7 / 8.3 / (s, L) 18.6 / 0.75".into())
}

fn diagonal_theorem() -> Outcome {
    let start = Instant::now();
    for n in 1..=50i64 {
        let m = build_payoff_matrix(&build_instance(n, -n, n as u64).unwrap());
        let pure = find_pure_equilibria(&m);
        check(pure.len() == n as usize, format!("n={n}: {} pure equilibria", pure.len()))?;
        for e in &pure {
            let q = m.row_actions[e.row].quantity;
            check(
                e.row == e.col && m.col_actions[e.col].quantity == q && e.payoffs == (q as i64, q as i64),
                format!("n={n}: off-diagonal equilibrium {e:?}"),
            )?;
        }
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(10), format!("took {elapsed:?}"))?;
    Ok(format!("n = 1..50 in {elapsed:.2?}"))
}

fn solver_soundness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut oracle: BTreeMap<(i64, i64), Vec<GridProfile>> = BTreeMap::new();
    let (mut profiles, mut crosschecked) = (0usize, 0usize);
    for _ in 0..500 {
        let bi = rng.random_range(1..=6i64);
        let bj = rng.random_range(-6..=-1i64);
        let instance: GameInstance = build_instance(bi, bj, 6).unwrap();
        let m: PayoffMatrix = build_payoff_matrix(&instance);
        let eqs = solve_mixed(&m).map_err(|e| e.to_string())?;
        check(!eqs.is_empty(), format!("({bi}, {bj}): no equilibria"))?;
        for eq in &eqs {
            profiles += 1;
            check(
                verify_equilibrium(&m, eq, &Rational::zero()).unwrap(),
                format!("({bi}, {bj}): {eq} fails verification"),
            )?;
        }
        if bi <= 4 && bj >= -4 {
            // Only 16 distinct games qualify; grid each once.
            let grid = oracle
                .entry((bi, bj))
                .or_insert_with(|| brute_force_oracle(&m, 200).unwrap());
            for eq in &eqs {
                crosschecked += 1;
                // Search in floats, then confirm the winner exactly.
                let (p, q): (Vec<f64>, Vec<f64>) = (
                    eq.probs_i.iter().map(liqgame::exact::to_f64).collect(),
                    eq.probs_j.iter().map(liqgame::exact::to_f64).collect(),
                );
                let approx = |g: &GridProfile| {
                    let d = |a: Vec<f64>, b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                    d(g.probs_i(), &p).max(d(g.probs_j(), &q))
                };
                let nearest = grid
                    .iter()
                    .min_by(|a, b| approx(a).total_cmp(&approx(b)))
                    .map_or(f64::INFINITY, |g| g.distance_to(eq));
                check(
                    nearest <= 1.0 / 200.0,
                    format!("({bi}, {bj}): {eq} has no grid point (nearest {nearest})"),
                )?;
            }
        }
    }
    Ok(format!("{profiles} profiles verified, {crosschecked} cross-checked on the grid"))
}

fn uniform_config(seed: u64) -> SimConfig {
    SimConfig {
        trials: 100_000,
        strategy_i: StrategySpec::UniformRandom,
        strategy_j: StrategySpec::UniformRandom,
        seed,
        ..SimConfig::default()
    }
}

fn simulation_convergence() -> Outcome {
    let start = Instant::now();
    let config = uniform_config(2024);
    let first = run_simulation(&config).map_err(|e| e.to_string())?;
    let second = run_simulation(&config).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    check(
        report::to_json(&first) == report::to_json(&second),
        "same seed gave different reports",
    )?;
    let exact = analytic_hit_ratio(config.balance_range_i, config.balance_range_j, config.strategy_i, config.strategy_j)
        .map_err(|e| e.to_string())?;
    let se = (exact * (1.0 - exact) / config.trials as f64).sqrt();
    let err = (first.hit_ratio - exact).abs();
    check(err < 3.0 * se, format!("hit ratio {} vs {exact}: {:.2} SE", first.hit_ratio, err / se))?;
    check(elapsed < Duration::from_secs(30), format!("took {elapsed:?}"))?;
    Ok(format!(
        "hit ratio {} vs exact {exact:.6} ({:.2} SE), byte-identical, {elapsed:.2?}",
        first.hit_ratio,
        err / se
    ))
}

fn lp_transfer() -> Outcome {
    check(max_transfer(TransferProblem::new(10, 20)) == 10, "max_transfer(10, 20) != 10")?;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..10_000 {
        let (a, b) = (rng.random_range(0..=1_000_000u64), rng.random_range(0..=1_000_000u64));
        let x = max_transfer(TransferProblem::new(a, b));
        check(x == max_transfer(TransferProblem::new(b, a)), format!("asymmetric at ({a}, {b})"))?;
        check(x <= a && x <= b && (x == a || x == b), format!("infeasible or suboptimal at ({a}, {b})"))?;
    }
    Ok("(10, 20) -> 10; 10^4 pairs symmetric and feasible".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("golden 2x2 game", golden_2x2),
        ("golden 3x3 game", golden_3x3),
        ("bayesian threshold", bayes_threshold),
        ("market aggregates", market_aggregates),
        ("diagonal theorem", diagonal_theorem),
        ("solver soundness", solver_soundness),
        ("simulation convergence", simulation_convergence),
        ("lp transfer", lp_transfer),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(msg)
        });
        match result {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
