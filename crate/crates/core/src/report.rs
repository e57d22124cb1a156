//! Serializable reports. The CLI prints exactly these, so library callers
//! get byte-identical output by going through [`to_json`].

use serde::Serialize;

use crate::bayes::{self, BayesError, BayesianSolution, ConditionalGame, Responses, TypeSpace};
use crate::game::{build_payoff_matrix, GameInstance, PayoffMatrix, PlayerId};
use crate::market::{self, CompositionMatrix, MarketError, QuadrantReport};
use crate::solver::{self, Dominance, MixedProfile, PureEquilibrium, SolverError, Strictness};

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports always serialize");
    s.push('\n');
    s
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub instance: GameInstance,
    pub matrix: PayoffMatrix,
    pub pure_equilibria: Vec<PureEquilibrium>,
    pub mixed_equilibria: Vec<MixedProfile>,
    pub dominance_i: Vec<Dominance>,
    pub dominance_j: Vec<Dominance>,
}

pub fn solve_report(instance: &GameInstance, max_dim: usize) -> Result<SolveReport, SolverError> {
    let matrix = build_payoff_matrix(instance);
    let mixed_equilibria = solver::solve_mixed_capped(&matrix, max_dim)?;
    Ok(SolveReport {
        instance: instance.clone(),
        pure_equilibria: solver::find_pure_equilibria(&matrix),
        mixed_equilibria,
        dominance_i: solver::dominated_actions(&matrix, PlayerId::I),
        dominance_j: solver::dominated_actions(&matrix, PlayerId::J),
        matrix,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TypeDominance {
    #[serde(rename = "type")]
    pub type_label: String,
    pub strategy: Option<String>,
    pub strictness: Option<Strictness>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StrategyValue {
    pub strategy: String,
    pub expected_payoff: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BayesReport {
    pub types: Vec<String>,
    pub prior: Vec<f64>,
    pub dominant_strategies: Vec<TypeDominance>,
    pub solution: BayesianSolution,
    pub expected_payoffs: Vec<StrategyValue>,
    pub best_response_at_prior: String,
}

/// Threshold analysis under `responses`, or under each type's dominant
/// strategy when none are given.
pub fn bayes_report(
    game: &ConditionalGame,
    space: &TypeSpace,
    responses: Option<Responses>,
) -> Result<BayesReport, BayesError> {
    let dominant_strategies: Vec<TypeDominance> = game
        .types
        .iter()
        .enumerate()
        .map(|(t, label)| {
            let d = bayes::dominant_strategy_per_type(game, t);
            TypeDominance {
                type_label: label.clone(),
                strategy: d.as_ref().map(|(s, _)| s.clone()),
                strictness: d.map(|(_, k)| k),
            }
        })
        .collect();
    let responses = match responses {
        Some(r) => r,
        None => {
            let mut r = Responses::new();
            for d in &dominant_strategies {
                let s = d
                    .strategy
                    .clone()
                    .ok_or_else(|| BayesError::MissingResponse(d.type_label.clone()))?;
                r.insert(d.type_label.clone(), s);
            }
            r
        }
    };
    let solution = bayes::indifference_threshold(game, space, &responses)?;
    let (best, values) = bayes::best_response(game, space, &responses)?;
    Ok(BayesReport {
        types: space.types.clone(),
        prior: space.prior.clone(),
        dominant_strategies,
        solution,
        expected_payoffs: values
            .into_iter()
            .map(|(strategy, expected_payoff)| StrategyValue {
                strategy,
                expected_payoff,
            })
            .collect(),
        best_response_at_prior: best,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BestQuadrant {
    pub row_type: String,
    pub col_type: String,
    pub sum: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MarketReport {
    pub source: String,
    #[serde(flatten)]
    pub analysis: QuadrantReport,
    pub best_quadrant: BestQuadrant,
}

pub fn market_report(source: &str, matrix: &CompositionMatrix) -> Result<MarketReport, MarketError> {
    let analysis = market::quadrant_analysis(matrix)?;
    let best = market::best_quadrant(&analysis).expect("two-by-two quadrants");
    Ok(MarketReport {
        source: source.into(),
        best_quadrant: BestQuadrant {
            row_type: best.row_type.clone(),
            col_type: best.col_type.clone(),
            sum: market::round1(best.sum),
        },
        analysis,
    })
}
