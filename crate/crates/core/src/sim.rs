//! Seeded Monte Carlo simulation of liquidity games.
//!
//! Each trial draws the two balances uniformly from their ranges and lets
//! each player pick a parcel from its [`StrategySpec`]. In one-shot mode a
//! trial is a single play. In repeated mode successful trades are applied
//! and play continues on the reduced balances until one side is cleared or
//! the round limit is hit.
//!
//! Trial `k` draws from its own ChaCha8 stream (`seed`, stream `k`), so the
//! report does not depend on how trials are scheduled across threads.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{apply_trade, bilateral_payoff, build_instance, Action};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("max_rounds must be at least 1")]
    NoRounds,
    #[error("{field} is empty ({min}..={max})")]
    EmptyRange { field: &'static str, min: i64, max: i64 },
    #[error("{field} must be strictly {sign} ({min}..={max})")]
    WrongSign {
        field: &'static str,
        sign: &'static str,
        min: i64,
        max: i64,
    },
    #[error("{field}: fraction must lie in (0, 1], got {fraction}")]
    BadFraction { field: &'static str, fraction: f64 },
    #[error("strategy has no closed-form offer distribution")]
    IntractableStrategy,
}

/// Inclusive integer interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalanceRange {
    pub min: i64,
    pub max: i64,
}

impl BalanceRange {
    pub const fn new(min: i64, max: i64) -> Self {
        BalanceRange { min, max }
    }

    pub fn len(&self) -> u64 {
        (self.max - self.min + 1).max(0) as u64
    }

    pub fn is_empty(&self) -> bool {
        self.max < self.min
    }

    /// Absolute values covered by the range, ascending.
    fn magnitudes(&self) -> impl Iterator<Item = u64> {
        let (lo, hi) = (self.min.unsigned_abs(), self.max.unsigned_abs());
        lo.min(hi)..=lo.max(hi)
    }

    fn largest_magnitude(&self) -> u64 {
        self.min.unsigned_abs().max(self.max.unsigned_abs())
    }
}

/// How a player sizes its parcel from its absolute balance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StrategySpec {
    /// `round_half_up(fraction * |B|)`, at least 1.
    FixedFraction { fraction: f64 },
    /// Uniform over `1..=|B|`.
    UniformRandom,
    /// The whole balance.
    FullBalance,
}

impl StrategySpec {
    /// Default quantification of a "high" play.
    pub const HIGH: StrategySpec = StrategySpec::FixedFraction { fraction: 0.9 };
    /// Default quantification of a "low" play.
    pub const LOW: StrategySpec = StrategySpec::FixedFraction { fraction: 0.3 };

    /// Parcel for a nonzero `magnitude`. Only `UniformRandom` touches the rng.
    pub fn action<R: Rng + ?Sized>(&self, magnitude: u64, rng: &mut R) -> Action {
        debug_assert!(magnitude > 0);
        let q = match *self {
            StrategySpec::FixedFraction { fraction } => fixed_fraction(fraction, magnitude),
            StrategySpec::UniformRandom => rng.random_range(1..=magnitude),
            StrategySpec::FullBalance => magnitude,
        };
        Action::new(q)
    }

    fn validate(&self, field: &'static str) -> Result<(), SimError> {
        if let StrategySpec::FixedFraction { fraction } = *self {
            if !(fraction > 0.0 && fraction <= 1.0) {
                return Err(SimError::BadFraction { field, fraction });
            }
        }
        Ok(())
    }
}

fn fixed_fraction(fraction: f64, magnitude: u64) -> u64 {
    // The nudge keeps exact decimal halves such as 0.3 * 5 rounding up.
    let q = (fraction * magnitude as f64 + 0.5 + 1e-9).floor() as u64;
    q.clamp(1, magnitude)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimMode {
    OneShot,
    Repeated,
}

fn default_trials() -> u64 {
    10_000
}
fn default_range_i() -> BalanceRange {
    BalanceRange::new(1, 1000)
}
fn default_range_j() -> BalanceRange {
    BalanceRange::new(-1000, -1)
}
fn default_strategy_i() -> StrategySpec {
    StrategySpec::LOW
}
fn default_strategy_j() -> StrategySpec {
    StrategySpec::HIGH
}
fn default_mode() -> SimMode {
    SimMode::OneShot
}
fn default_max_rounds() -> u32 {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default = "default_range_i")]
    pub balance_range_i: BalanceRange,
    #[serde(default = "default_range_j")]
    pub balance_range_j: BalanceRange,
    #[serde(default = "default_strategy_i")]
    pub strategy_i: StrategySpec,
    #[serde(default = "default_strategy_j")]
    pub strategy_j: StrategySpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_mode")]
    pub mode: SimMode,
    #[serde(default = "default_max_rounds")]
    pub max_rounds: u32,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            trials: default_trials(),
            balance_range_i: default_range_i(),
            balance_range_j: default_range_j(),
            strategy_i: default_strategy_i(),
            strategy_j: default_strategy_j(),
            seed: 0,
            mode: default_mode(),
            max_rounds: default_max_rounds(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.trials == 0 {
            return Err(SimError::NoTrials);
        }
        if self.max_rounds == 0 {
            return Err(SimError::NoRounds);
        }
        check_range("balance_range_i", self.balance_range_i, true)?;
        check_range("balance_range_j", self.balance_range_j, false)?;
        self.strategy_i.validate("strategy_i")?;
        self.strategy_j.validate("strategy_j")
    }

    fn issue_cap(&self) -> u64 {
        self.balance_range_i
            .largest_magnitude()
            .max(self.balance_range_j.largest_magnitude())
    }
}

fn check_range(field: &'static str, r: BalanceRange, positive: bool) -> Result<(), SimError> {
    if r.is_empty() {
        return Err(SimError::EmptyRange {
            field,
            min: r.min,
            max: r.max,
        });
    }
    let ok = if positive { r.min >= 1 } else { r.max <= -1 };
    if !ok {
        return Err(SimError::WrongSign {
            field,
            sign: if positive { "positive" } else { "negative" },
            min: r.min,
            max: r.max,
        });
    }
    Ok(())
}

/// Outcome of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialRecord {
    pub balance_i: i64,
    pub balance_j: i64,
    /// Plays attempted.
    pub rounds: u32,
    pub trades: u32,
    pub volume: u64,
    /// Repeated mode only: one side reached zero.
    pub cleared: bool,
}

/// Runs trial `index` on its own substream. Valid configs only.
pub fn simulate_trial(config: &SimConfig, index: u64) -> TrialRecord {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index);
    let bi = rng.random_range(config.balance_range_i.min..=config.balance_range_i.max);
    let bj = rng.random_range(config.balance_range_j.min..=config.balance_range_j.max);
    let mut record = TrialRecord {
        balance_i: bi,
        balance_j: bj,
        rounds: 0,
        trades: 0,
        volume: 0,
        cleared: false,
    };

    let mut game = build_instance(bi, bj, config.issue_cap()).expect("validated config");
    let rounds = match config.mode {
        SimMode::OneShot => 1,
        SimMode::Repeated => config.max_rounds,
    };
    let total = bi + bj;
    for round in 1..=rounds {
        record.rounds = round;
        let offer = config.strategy_i.action(game.holding_i.magnitude(), &mut rng);
        let capacity = config.strategy_j.action(game.holding_j.magnitude(), &mut rng);
        let (q, _) = bilateral_payoff(offer, capacity);
        if q > 0 {
            record.trades += 1;
            record.volume += q as u64;
            if config.mode == SimMode::Repeated {
                game = apply_trade(&game, q as u64).expect("payoff rule never over-trades");
                let (ni, nj) = game.balances();
                assert_eq!(ni + nj, total, "balance sum must be conserved");
                assert!(ni >= 0 && nj <= 0, "balances must keep their sign");
                if game.is_cleared() {
                    record.cleared = true;
                    break;
                }
            }
        }
    }
    record
}

/// Commutative merge of trial records.
#[derive(Debug, Clone, Default, PartialEq)]
struct Tally {
    opportunities: u64,
    trades: u64,
    volume: u64,
    uncleared: u64,
    histogram: BTreeMap<u32, u64>,
}

impl Tally {
    fn add(mut self, r: &TrialRecord, mode: SimMode) -> Self {
        self.opportunities += r.rounds as u64;
        self.trades += r.trades as u64;
        self.volume += r.volume;
        if mode == SimMode::Repeated {
            if r.cleared {
                *self.histogram.entry(r.rounds).or_default() += 1;
            } else {
                self.uncleared += 1;
            }
        }
        self
    }

    fn merge(mut self, other: Tally) -> Self {
        self.opportunities += other.opportunities;
        self.trades += other.trades;
        self.volume += other.volume;
        self.uncleared += other.uncleared;
        for (k, v) in other.histogram {
            *self.histogram.entry(k).or_default() += v;
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub seed: u64,
    pub mode: SimMode,
    pub trials: u64,
    /// Plays attempted; equals `trials` in one-shot mode.
    pub opportunities: u64,
    pub trades_executed: u64,
    pub hit_ratio: f64,
    pub total_volume: u64,
    pub mean_volume_per_trial: f64,
    /// Repeated mode: rounds needed by each trial that cleared.
    pub rounds_to_clear_histogram: BTreeMap<u32, u64>,
    pub uncleared_trials: u64,
}

impl SimReport {
    /// `rounds,count` table of the clearance histogram.
    pub fn histogram_csv(&self) -> String {
        let mut out = String::from("rounds,count\n");
        for (r, c) in &self.rounds_to_clear_histogram {
            out.push_str(&format!("{r},{c}\n"));
        }
        out
    }
}

pub fn run_simulation(config: &SimConfig) -> Result<SimReport, SimError> {
    config.validate()?;
    let mode = config.mode;
    let tally = (0..config.trials)
        .into_par_iter()
        .fold(Tally::default, |t, k| t.add(&simulate_trial(config, k), mode))
        .reduce(Tally::default, Tally::merge);
    Ok(SimReport {
        seed: config.seed,
        mode,
        trials: config.trials,
        opportunities: tally.opportunities,
        trades_executed: tally.trades,
        hit_ratio: tally.trades as f64 / tally.opportunities as f64,
        total_volume: tally.volume,
        mean_volume_per_trial: tally.volume as f64 / config.trials as f64,
        rounds_to_clear_histogram: tally.histogram,
        uncleared_trials: tally.uncleared,
    })
}

/// Distribution of the parcel size when the balance magnitude is uniform
/// over `range`. Index `k` holds `P(action = k)`.
fn offer_distribution(range: BalanceRange, strategy: StrategySpec) -> Vec<f64> {
    let top = range.largest_magnitude() as usize;
    let weight = 1.0 / range.len() as f64;
    let mut pmf = vec![0.0; top + 1];
    match strategy {
        StrategySpec::FullBalance => {
            for b in range.magnitudes() {
                pmf[b as usize] += weight;
            }
        }
        StrategySpec::FixedFraction { fraction } => {
            for b in range.magnitudes() {
                pmf[fixed_fraction(fraction, b) as usize] += weight;
            }
        }
        StrategySpec::UniformRandom => {
            // P(a = k) = weight * sum over b >= k of 1/b.
            let mut tail = vec![0.0; top + 2];
            for b in range.magnitudes() {
                tail[b as usize] += weight / b as f64;
            }
            let mut acc = 0.0;
            for k in (1..=top).rev() {
                acc += tail[k];
                pmf[k] = acc;
            }
        }
    }
    pmf
}

/// Exact probability that player `I`'s parcel fits inside player `J`'s,
/// with both balances uniform over their ranges.
pub fn analytic_hit_ratio(
    range_i: BalanceRange,
    range_j: BalanceRange,
    strategy_i: StrategySpec,
    strategy_j: StrategySpec,
) -> Result<f64, SimError> {
    check_range("balance_range_i", range_i, true)?;
    check_range("balance_range_j", range_j, false)?;
    strategy_i.validate("strategy_i")?;
    strategy_j.validate("strategy_j")?;
    let offer = offer_distribution(range_i, strategy_i);
    let capacity = offer_distribution(range_j, strategy_j);
    // survival[k] = P(capacity >= k)
    let mut survival = vec![0.0; capacity.len() + 1];
    for k in (0..capacity.len()).rev() {
        survival[k] = survival[k + 1] + capacity[k];
    }
    Ok(offer
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, p)| p * survival.get(k).copied().unwrap_or(0.0))
        .sum())
}
