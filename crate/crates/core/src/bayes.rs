//! Two-type Bayesian liquidity game.
//!
//! Player 1 does not know whether player 2 is a large (type `a`) or small
//! (type `b`) bank. Player 2 knows its own type, so its play is a response
//! per type; player 1 weighs the type-conditional payoff matrices by its
//! prior and picks whichever strategy has the higher expected payoff. The
//! interesting quantity is the prior weight on the first type at which
//! player 1 is indifferent.
//!
//! Payoffs here are real-valued and need not be symmetric.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::solver::Strictness;

/// Equality tolerance for real-valued payoffs and priors.
pub const TOLERANCE: f64 = 1e-12;

pub type Responses = BTreeMap<String, String>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BayesError {
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("prior has {prior} entries for {types} types")]
    PriorLength { types: usize, prior: usize },
    #[error("prior entries must be non-negative and sum to 1 (sum = {sum})")]
    InvalidPrior { sum: f64 },
    #[error("matrix for type {type_label:?} is not {rows}x{cols}")]
    MatrixShape {
        type_label: String,
        rows: usize,
        cols: usize,
    },
    #[error("no payoff matrix for type {0:?}")]
    MissingMatrix(String),
    #[error("threshold needs exactly two types and two player-1 strategies (got {types} and {strategies})")]
    UnsupportedShape { types: usize, strategies: usize },
    #[error("no response given for type {0:?}")]
    MissingResponse(String),
    #[error("both strategies pay the same for every prior")]
    NoDependenceOnPrior,
}

/// Labels for player 2's possible types with player 1's prior over them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeSpace {
    pub types: Vec<String>,
    pub prior: Vec<f64>,
}

impl TypeSpace {
    pub fn new(types: Vec<String>, prior: Vec<f64>) -> Result<Self, BayesError> {
        if types.len() != prior.len() {
            return Err(BayesError::PriorLength {
                types: types.len(),
                prior: prior.len(),
            });
        }
        let sum: f64 = prior.iter().sum();
        if prior.iter().any(|&p| !(p >= 0.0)) || (sum - 1.0).abs() > TOLERANCE {
            return Err(BayesError::InvalidPrior { sum });
        }
        Ok(TypeSpace { types, prior })
    }

    /// Two-type space with weight `p` on the first type.
    pub fn two(first: &str, second: &str, p: f64) -> Result<Self, BayesError> {
        TypeSpace::new(vec![first.into(), second.into()], vec![p, 1.0 - p])
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.types.iter().position(|t| t == label)
    }
}

pub type RealBimatrix = Vec<Vec<(f64, f64)>>;

/// One bimatrix per opponent type, all over the same strategy labels.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalGame {
    pub types: Vec<String>,
    pub strategies_i: Vec<String>,
    pub strategies_j: Vec<String>,
    pub matrices: Vec<RealBimatrix>,
}

impl ConditionalGame {
    pub fn new(
        types: Vec<String>,
        strategies_i: Vec<String>,
        strategies_j: Vec<String>,
        matrices: Vec<RealBimatrix>,
    ) -> Result<Self, BayesError> {
        let (rows, cols) = (strategies_i.len(), strategies_j.len());
        if matrices.len() != types.len() {
            let missing = types.get(matrices.len()).cloned().unwrap_or_default();
            return Err(BayesError::MissingMatrix(missing));
        }
        for (t, m) in types.iter().zip(&matrices) {
            if m.len() != rows || m.iter().any(|r| r.len() != cols) {
                return Err(BayesError::MatrixShape {
                    type_label: t.clone(),
                    rows,
                    cols,
                });
            }
        }
        Ok(ConditionalGame {
            types,
            strategies_i,
            strategies_j,
            matrices,
        })
    }

    fn type_index(&self, label: &str) -> Result<usize, BayesError> {
        self.types
            .iter()
            .position(|t| t == label)
            .ok_or_else(|| BayesError::UnknownLabel(label.into()))
    }

    fn strategy_i(&self, label: &str) -> Result<usize, BayesError> {
        self.strategies_i
            .iter()
            .position(|s| s == label)
            .ok_or_else(|| BayesError::UnknownLabel(label.into()))
    }

    fn strategy_j(&self, label: &str) -> Result<usize, BayesError> {
        self.strategies_j
            .iter()
            .position(|s| s == label)
            .ok_or_else(|| BayesError::UnknownLabel(label.into()))
    }

    /// Player 1's payoff for `(row, col)` against the given type.
    fn u_i(&self, t: usize, row: usize, col: usize) -> f64 {
        self.matrices[t][row][col].0
    }

    /// Player 2's best choice per type, when a dominant one exists for
    /// every type.
    pub fn dominant_responses(&self) -> Option<Responses> {
        (0..self.types.len())
            .map(|t| dominant_strategy_per_type(self, t).map(|(s, _)| (self.types[t].clone(), s)))
            .collect()
    }
}

/// JSON document describing a conditional game and its prior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesDocument {
    pub types: Vec<String>,
    pub prior: Vec<f64>,
    pub strategies: Vec<String>,
    pub matrices: BTreeMap<String, Vec<Vec<[f64; 2]>>>,
    /// Optional counterfactual responses of player 2, by type.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub responses: Option<Responses>,
}

impl BayesDocument {
    pub fn into_game(self) -> Result<(ConditionalGame, TypeSpace, Option<Responses>), BayesError> {
        let space = TypeSpace::new(self.types.clone(), self.prior)?;
        let mut matrices = Vec::with_capacity(self.types.len());
        for t in &self.types {
            let m = self
                .matrices
                .get(t)
                .ok_or_else(|| BayesError::MissingMatrix(t.clone()))?;
            matrices.push(m.iter().map(|r| r.iter().map(|&[a, b]| (a, b)).collect()).collect());
        }
        if let Some(extra) = self.matrices.keys().find(|k| !self.types.contains(k)) {
            return Err(BayesError::UnknownLabel(extra.clone()));
        }
        let game = ConditionalGame::new(self.types, self.strategies.clone(), self.strategies, matrices)?;
        if let Some(resp) = &self.responses {
            validate_responses(&game, resp)?;
        }
        Ok((game, space, self.responses))
    }
}

fn validate_responses(game: &ConditionalGame, responses: &Responses) -> Result<(), BayesError> {
    for (t, s) in responses {
        game.type_index(t)?;
        game.strategy_j(s)?;
    }
    for t in &game.types {
        if !responses.contains_key(t) {
            return Err(BayesError::MissingResponse(t.clone()));
        }
    }
    Ok(())
}

/// Player 2's strategy that weakly dominates every other one in the given
/// type's matrix, first by label order. `None` when no such strategy exists
/// or the index is out of range.
pub fn dominant_strategy_per_type(game: &ConditionalGame, type_index: usize) -> Option<(String, Strictness)> {
    let m = game.matrices.get(type_index)?;
    let cols = game.strategies_j.len();
    let u_j = |r: usize, c: usize| m[r][c].1;
    (0..cols).find_map(|c| {
        let others = (0..cols).filter(|&o| o != c);
        let weak = others
            .clone()
            .all(|o| (0..m.len()).all(|r| u_j(r, c) >= u_j(r, o)));
        if !weak {
            return None;
        }
        let strict = others.clone().all(|o| (0..m.len()).all(|r| u_j(r, c) > u_j(r, o)));
        Some((
            game.strategies_j[c].clone(),
            if strict { Strictness::Strict } else { Strictness::Weak },
        ))
    })
}

/// Prior-weighted payoff to player 1 of `strategy_i` when player 2 plays
/// `response_j[t]` as type `t`.
pub fn expected_payoff(
    game: &ConditionalGame,
    space: &TypeSpace,
    strategy_i: &str,
    response_j: &Responses,
) -> Result<f64, BayesError> {
    let row = game.strategy_i(strategy_i)?;
    let mut total = 0.0;
    for (label, &weight) in space.types.iter().zip(&space.prior) {
        let t = game.type_index(label)?;
        let resp = response_j
            .get(label)
            .ok_or_else(|| BayesError::MissingResponse(label.clone()))?;
        total += weight * game.u_i(t, row, game.strategy_j(resp)?);
    }
    Ok(total)
}

/// Player 1's expected payoff for each strategy and the best one (first by
/// label order on ties within [`TOLERANCE`]).
pub fn best_response(
    game: &ConditionalGame,
    space: &TypeSpace,
    response_j: &Responses,
) -> Result<(String, Vec<(String, f64)>), BayesError> {
    let values = game
        .strategies_i
        .iter()
        .map(|s| Ok((s.clone(), expected_payoff(game, space, s, response_j)?)))
        .collect::<Result<Vec<_>, BayesError>>()?;
    let mut best = 0;
    for (i, (_, v)) in values.iter().enumerate() {
        if *v > values[best].1 + TOLERANCE {
            best = i;
        }
    }
    Ok((values[best].0.clone(), values))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesianSolution {
    pub per_type_strategy_j: Responses,
    /// Prior weight on the first type at which player 1 is indifferent.
    pub threshold_p: f64,
    /// Preferred for priors above the threshold.
    pub strategy_i_above: String,
    /// Preferred for priors below the threshold.
    pub strategy_i_below: String,
    /// Set when the two expected payoffs do not cross inside `[0, 1]`; the
    /// threshold is then clamped and both strategy fields name the strategy
    /// preferred everywhere.
    pub exterior: bool,
}

/// Solves `E[u(s1)] = E[u(s2)]` for the prior weight `p` on the first type.
///
/// Both expected payoffs are linear in `p`, so their difference is
/// `alpha + beta * p`. A root outside `[0, 1]` is clamped to the nearest
/// end. When the difference is a nonzero constant there is no root at all
/// and the threshold is reported as 1.
pub fn indifference_threshold(
    game: &ConditionalGame,
    space: &TypeSpace,
    response_j: &Responses,
) -> Result<BayesianSolution, BayesError> {
    if space.types.len() != 2 || game.strategies_i.len() != 2 {
        return Err(BayesError::UnsupportedShape {
            types: space.types.len(),
            strategies: game.strategies_i.len(),
        });
    }
    validate_responses(game, response_j)?;
    let s1 = &game.strategies_i[0];
    let s2 = &game.strategies_i[1];
    let diff_at = |p: f64| -> Result<f64, BayesError> {
        let at = TypeSpace {
            types: space.types.clone(),
            prior: vec![p, 1.0 - p],
        };
        Ok(expected_payoff(game, &at, s1, response_j)? - expected_payoff(game, &at, s2, response_j)?)
    };
    let alpha = diff_at(0.0)?;
    let beta = diff_at(1.0)? - alpha;

    let solution = |threshold_p: f64, above: &String, below: &String, exterior: bool| BayesianSolution {
        per_type_strategy_j: response_j.clone(),
        threshold_p,
        strategy_i_above: above.clone(),
        strategy_i_below: below.clone(),
        exterior,
    };

    if beta.abs() <= TOLERANCE {
        if alpha.abs() <= TOLERANCE {
            return Err(BayesError::NoDependenceOnPrior);
        }
        let winner = if alpha > 0.0 { s1 } else { s2 };
        return Ok(solution(1.0, winner, winner, true));
    }
    let root = -alpha / beta;
    let (above, below) = if beta > 0.0 { (s1, s2) } else { (s2, s1) };
    if root < 0.0 {
        Ok(solution(0.0, above, above, true))
    } else if root > 1.0 {
        Ok(solution(1.0, below, below, true))
    } else {
        Ok(solution(root, above, below, false))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn large_small_game() -> ConditionalGame {
        ConditionalGame::new(
            labels(&["a", "b"]),
            labels(&["high", "low"]),
            labels(&["high", "low"]),
            vec![
                vec![vec![(10.0, 10.0), (0.0, 0.0)], vec![(6.0, 6.0), (5.0, 5.0)]],
                vec![vec![(0.0, 0.0), (0.0, 0.0)], vec![(5.0, 4.0), (0.0, 0.0)]],
            ],
        )
        .unwrap()
    }

    fn resp(a: &str, b: &str) -> Responses {
        [("a".to_string(), a.to_string()), ("b".to_string(), b.to_string())]
            .into_iter()
            .collect()
    }

    #[test]
    fn dominance_per_type() {
        let g = large_small_game();
        assert_eq!(dominant_strategy_per_type(&g, 0), Some(("high".into(), Strictness::Strict)));
        assert_eq!(dominant_strategy_per_type(&g, 1), Some(("high".into(), Strictness::Weak)));
        assert_eq!(dominant_strategy_per_type(&g, 2), None);
        assert_eq!(g.dominant_responses(), Some(resp("high", "high")));

        let constant = ConditionalGame::new(
            labels(&["a"]),
            labels(&["x", "y"]),
            labels(&["x", "y"]),
            vec![vec![vec![(1.0, 3.0); 2]; 2]],
        )
        .unwrap();
        assert_eq!(dominant_strategy_per_type(&constant, 0), Some(("x".into(), Strictness::Weak)));

        let crossing = ConditionalGame::new(
            labels(&["a"]),
            labels(&["x", "y"]),
            labels(&["x", "y"]),
            vec![vec![vec![(0.0, 1.0), (0.0, 0.0)], vec![(0.0, 0.0), (0.0, 1.0)]]],
        )
        .unwrap();
        assert_eq!(dominant_strategy_per_type(&crossing, 0), None);
    }

    #[test]
    fn large_small_threshold() {
        let g = large_small_game();
        let space = TypeSpace::two("a", "b", 0.35).unwrap();
        let sol = indifference_threshold(&g, &space, &resp("high", "high")).unwrap();
        assert!((sol.threshold_p - 5.0 / 9.0).abs() < 1e-12);
        assert_eq!(sol.strategy_i_above, "high");
        assert_eq!(sol.strategy_i_below, "low");
        assert!(!sol.exterior);
    }

    #[test]
    fn expected_payoffs_at_threshold() {
        let g = large_small_game();
        let space = TypeSpace::two("a", "b", 5.0 / 9.0).unwrap();
        let r = resp("high", "high");
        let high = expected_payoff(&g, &space, "high", &r).unwrap();
        let low = expected_payoff(&g, &space, "low", &r).unwrap();
        assert!((high - 50.0 / 9.0).abs() < 1e-12);
        assert!((low - 50.0 / 9.0).abs() < 1e-12);

        let degenerate = TypeSpace::two("a", "b", 1.0).unwrap();
        assert_eq!(expected_payoff(&g, &degenerate, "low", &r).unwrap(), 6.0);
        assert_eq!(
            expected_payoff(&g, &space, "mid", &r),
            Err(BayesError::UnknownLabel("mid".into()))
        );
    }

    #[test]
    fn threshold_one_half() {
        // u(high) = 10p, u(low) = 5.
        let g = ConditionalGame::new(
            labels(&["a", "b"]),
            labels(&["high", "low"]),
            labels(&["high", "low"]),
            vec![
                vec![vec![(10.0, 0.0), (10.0, 0.0)], vec![(5.0, 0.0), (5.0, 0.0)]],
                vec![vec![(0.0, 0.0), (0.0, 0.0)], vec![(5.0, 0.0), (5.0, 0.0)]],
            ],
        )
        .unwrap();
        let space = TypeSpace::two("a", "b", 0.5).unwrap();
        let sol = indifference_threshold(&g, &space, &resp("high", "high")).unwrap();
        assert!((sol.threshold_p - 0.5).abs() < 1e-12);
    }

    #[test]
    fn exterior_and_degenerate_cases() {
        // high pays 3 more than low for every prior.
        let g = ConditionalGame::new(
            labels(&["a", "b"]),
            labels(&["high", "low"]),
            labels(&["high", "low"]),
            vec![
                vec![vec![(8.0, 0.0); 2], vec![(5.0, 0.0); 2]],
                vec![vec![(4.0, 0.0); 2], vec![(1.0, 0.0); 2]],
            ],
        )
        .unwrap();
        let space = TypeSpace::two("a", "b", 0.3).unwrap();
        let sol = indifference_threshold(&g, &space, &resp("high", "high")).unwrap();
        assert_eq!(sol.threshold_p, 1.0);
        assert!(sol.exterior);
        assert_eq!((sol.strategy_i_above.as_str(), sol.strategy_i_below.as_str()), ("high", "high"));

        // Crossing at p = -2/3: clamp to 0, high everywhere on [0, 1].
        let g2 = ConditionalGame::new(
            labels(&["a", "b"]),
            labels(&["high", "low"]),
            labels(&["high", "low"]),
            vec![
                vec![vec![(10.0, 0.0); 2], vec![(5.0, 0.0); 2]],
                vec![vec![(3.0, 0.0); 2], vec![(1.0, 0.0); 2]],
            ],
        )
        .unwrap();
        let sol = indifference_threshold(&g2, &space, &resp("high", "high")).unwrap();
        assert_eq!(sol.threshold_p, 0.0);
        assert!(sol.exterior);
        assert_eq!(sol.strategy_i_below, "high");

        let flat = ConditionalGame::new(
            labels(&["a", "b"]),
            labels(&["high", "low"]),
            labels(&["high", "low"]),
            vec![vec![vec![(2.0, 0.0); 2]; 2], vec![vec![(1.0, 0.0); 2]; 2]],
        )
        .unwrap();
        assert_eq!(
            indifference_threshold(&flat, &space, &resp("high", "low")),
            Err(BayesError::NoDependenceOnPrior)
        );
    }

    #[test]
    fn counterfactual_low_response_of_large_type() {
        // a plays low, b plays high: E[high] = 0, E[low] = 5p + 5(1-p) = 5.
        let g = large_small_game();
        let space = TypeSpace::two("a", "b", 0.35).unwrap();
        let sol = indifference_threshold(&g, &space, &resp("low", "high")).unwrap();
        assert!(sol.exterior);
        assert_eq!(sol.threshold_p, 1.0);
        assert_eq!(sol.strategy_i_above, "low");
        assert_eq!(sol.strategy_i_below, "low");
    }

    #[test]
    fn degenerate_prior_is_single_matrix_best_response() {
        let g = large_small_game();
        let r = resp("high", "high");
        let (best, _) = best_response(&g, &TypeSpace::two("a", "b", 1.0).unwrap(), &r).unwrap();
        assert_eq!(best, "high");
        let (best, values) = best_response(&g, &TypeSpace::two("a", "b", 0.0).unwrap(), &r).unwrap();
        assert_eq!(best, "low");
        assert_eq!(values, vec![("high".into(), 0.0), ("low".into(), 5.0)]);
    }

    #[test]
    fn validation() {
        assert!(matches!(
            TypeSpace::new(labels(&["a", "b"]), vec![0.5]),
            Err(BayesError::PriorLength { .. })
        ));
        assert!(matches!(
            TypeSpace::new(labels(&["a", "b"]), vec![0.5, 0.6]),
            Err(BayesError::InvalidPrior { .. })
        ));
        assert!(matches!(
            TypeSpace::new(labels(&["a", "b"]), vec![1.5, -0.5]),
            Err(BayesError::InvalidPrior { .. })
        ));
        let g = large_small_game();
        let space = TypeSpace::two("a", "b", 0.5).unwrap();
        let mut partial = Responses::new();
        partial.insert("a".into(), "high".into());
        assert_eq!(
            indifference_threshold(&g, &space, &partial),
            Err(BayesError::MissingResponse("b".into()))
        );
        assert!(matches!(
            ConditionalGame::new(labels(&["a"]), labels(&["x"]), labels(&["x"]), vec![vec![vec![(0.0, 0.0); 2]]]),
            Err(BayesError::MatrixShape { .. })
        ));
    }

    #[test]
    fn document_round_trip() {
        let json = r#"{
            "types": ["a", "b"], "prior": [0.35, 0.65], "strategies": ["high", "low"],
            "matrices": {
                "a": [[[10, 10], [0, 0]], [[6, 6], [5, 5]]],
                "b": [[[0, 0], [0, 0]], [[5, 4], [0, 0]]]
            }
        }"#;
        let doc: BayesDocument = serde_json::from_str(json).unwrap();
        let (g, space, responses) = doc.into_game().unwrap();
        assert_eq!(g, large_small_game());
        assert_eq!(space.prior, vec![0.35, 0.65]);
        assert!(responses.is_none());

        let missing: BayesDocument = serde_json::from_str(
            r#"{"types": ["a", "b"], "prior": [0.5, 0.5], "strategies": ["x"], "matrices": {"a": [[[1, 1]]]}}"#,
        )
        .unwrap();
        assert_eq!(missing.into_game().unwrap_err(), BayesError::MissingMatrix("b".into()));
    }
}
