//! Bilateral liquidity games between a long and a short market maker.
//!
//! - [`game`]: instances, the payoff rule, payoff matrices.
//! - [`solver`]: pure and mixed equilibria in exact arithmetic, dominance,
//!   and a grid oracle for cross-checking.
//! - [`bayes`]: the incomplete-information game and its prior threshold.
//! - [`market`]: type-composition matrices and quadrant aggregates.
//! - [`sim`]: seeded Monte Carlo of one-shot and repeated play.
//! - [`lp`]: the single-transfer optimum.
//! - [`cli`] and [`report`]: the `liqgame` command and its JSON output.

pub mod bayes;
pub mod cli;
pub mod exact;
pub mod fixtures;
pub mod game;
pub mod lp;
pub mod market;
pub mod report;
pub mod sim;
pub mod solver;
