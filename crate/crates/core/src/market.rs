//! Market-composition analysis.
//!
//! Rows and columns are `(type, strategy)` pairs, e.g. `L+H` for a large
//! bank playing a high proportion of its balance. Volume is measured per
//! cell as the sum of both players' payoffs. Quadrants group cells by the
//! two players' types.
//!
//! Two sources of matrices are supported: weighting per-type-pair payoff
//! matrices by the type priors ([`weight_by_priors`]), and the two
//! published tables loaded verbatim ([`load_published_matrix`]). Some
//! published entries, such as the asymmetric `(1.9, 1.6)`, do not follow
//! from any single weighting rule; they are carried as data.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bayes::RealBimatrix;
use crate::fixtures;

/// Market share of the large banks among the 17 gilt-edged market makers,
/// as rounded in the published tables (6/17 is about 0.353).
pub const LARGE_SHARE: f64 = 0.35;
pub const SMALL_SHARE: f64 = 0.65;

const PRIOR_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum MarketError {
    #[error("no payoff matrix for type pair ({0}, {1})")]
    MissingTypePairMatrix(String, String),
    #[error("matrix for type pair ({0}, {1}) has the wrong shape")]
    MatrixShape(String, String),
    #[error("{side} prior has {got} entries for {expected} types")]
    PriorLength {
        side: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("{side} prior must be non-negative and sum to 1 (sum = {sum})")]
    InvalidPrior { side: &'static str, sum: f64 },
    #[error("payoffs must be non-negative (found {0})")]
    NegativePayoff(f64),
    #[error("unknown published table {0:?} (expected intermediate_2x4 or final_4x4)")]
    UnknownTable(String),
    #[error("{axis} labels span {found} types; quadrant analysis needs exactly 2")]
    NotTwoTypes { axis: &'static str, found: usize },
    #[error("bad label {0:?}; expected TYPE+STRATEGY")]
    BadLabel(String),
    #[error("table has no cell for ({0}, {1})")]
    MissingCell(String, String),
    #[error("malformed table: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Fixture(#[from] fixtures::FixtureError),
}

/// A `(type, strategy)` row or column label, written `type+strategy`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellLabel {
    pub type_label: String,
    pub strategy: String,
}

impl CellLabel {
    pub fn new(type_label: &str, strategy: &str) -> Self {
        CellLabel {
            type_label: type_label.into(),
            strategy: strategy.into(),
        }
    }

    pub fn parse(s: &str) -> Result<Self, MarketError> {
        match s.trim().split_once('+') {
            Some((t, st)) if !t.is_empty() && !st.is_empty() => Ok(CellLabel::new(t, st)),
            _ => Err(MarketError::BadLabel(s.into())),
        }
    }
}

impl fmt::Display for CellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+{}", self.type_label, self.strategy)
    }
}

impl Serialize for CellLabel {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompositionMatrix {
    pub row_labels: Vec<CellLabel>,
    pub col_labels: Vec<CellLabel>,
    pub entries: Vec<Vec<(f64, f64)>>,
    pub prior_i: Vec<(String, f64)>,
    pub prior_j: Vec<(String, f64)>,
}

/// Distinct type labels in order of first appearance.
fn types_of(labels: &[CellLabel]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for l in labels {
        if !out.contains(&l.type_label) {
            out.push(l.type_label.clone());
        }
    }
    out
}

impl CompositionMatrix {
    pub fn row_types(&self) -> Vec<String> {
        types_of(&self.row_labels)
    }

    pub fn col_types(&self) -> Vec<String> {
        types_of(&self.col_labels)
    }

    pub fn cells(&self) -> impl Iterator<Item = (&CellLabel, &CellLabel, (f64, f64))> + '_ {
        self.row_labels.iter().enumerate().flat_map(move |(r, rl)| {
            self.col_labels
                .iter()
                .enumerate()
                .map(move |(c, cl)| (rl, cl, self.entries[r][c]))
        })
    }

    /// Table form: header `row_label,col_label,u_i,u_j`, one line per cell,
    /// payoffs at display precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row_label,col_label,u_i,u_j\n");
        for (rl, cl, (a, b)) in self.cells() {
            out.push_str(&format!("{rl},{cl},{},{}\n", fmt1(a), fmt1(b)));
        }
        out
    }

    /// Per-cell volumes for plotting.
    pub fn volumes_csv(&self) -> String {
        let mut out = String::from("row_label,col_label,u_i,u_j,volume\n");
        for (rl, cl, (a, b)) in self.cells() {
            out.push_str(&format!("{rl},{cl},{},{},{}\n", fmt1(a), fmt1(b), fmt1(a + b)));
        }
        out
    }

    /// Parses the table form. Priors are not part of the table and are
    /// left empty.
    pub fn from_csv(text: &str) -> Result<Self, MarketError> {
        #[derive(Deserialize)]
        struct Row {
            row_label: String,
            col_label: String,
            u_i: f64,
            u_j: f64,
        }
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let mut rows: Vec<CellLabel> = Vec::new();
        let mut cols: Vec<CellLabel> = Vec::new();
        let mut cells: BTreeMap<(CellLabel, CellLabel), (f64, f64)> = BTreeMap::new();
        for rec in reader.deserialize::<Row>() {
            let rec = rec?;
            let (rl, cl) = (CellLabel::parse(&rec.row_label)?, CellLabel::parse(&rec.col_label)?);
            for v in [rec.u_i, rec.u_j] {
                if !(v >= 0.0) {
                    return Err(MarketError::NegativePayoff(v));
                }
            }
            if !rows.contains(&rl) {
                rows.push(rl.clone());
            }
            if !cols.contains(&cl) {
                cols.push(cl.clone());
            }
            cells.insert((rl, cl), (rec.u_i, rec.u_j));
        }
        let mut entries = Vec::with_capacity(rows.len());
        for rl in &rows {
            let mut line = Vec::with_capacity(cols.len());
            for cl in &cols {
                let v = cells
                    .get(&(rl.clone(), cl.clone()))
                    .ok_or_else(|| MarketError::MissingCell(rl.to_string(), cl.to_string()))?;
                line.push(*v);
            }
            entries.push(line);
        }
        Ok(CompositionMatrix {
            row_labels: rows,
            col_labels: cols,
            entries,
            prior_i: Vec::new(),
            prior_j: Vec::new(),
        })
    }
}

/// Rounds half-up to one decimal place.
pub fn round1(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

pub fn fmt1(x: f64) -> String {
    format!("{:.1}", round1(x))
}

/// Value in whole tenths, for exact comparisons at display precision.
pub fn tenths(x: f64) -> i64 {
    (x * 10.0).round() as i64
}

/// Payoff matrices for every `(row type, column type)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct TypePairGame {
    pub types_i: Vec<String>,
    pub types_j: Vec<String>,
    pub strategies_i: Vec<String>,
    pub strategies_j: Vec<String>,
    pub matrices: BTreeMap<(String, String), RealBimatrix>,
}

/// JSON form of a [`TypePairGame`] plus default priors. Matrix keys are
/// `"row_type|col_type"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypePairDocument {
    pub types: Vec<String>,
    pub strategies: Vec<String>,
    pub prior_i: Vec<f64>,
    pub prior_j: Vec<f64>,
    pub matrices: BTreeMap<String, Vec<Vec<[f64; 2]>>>,
}

impl TypePairDocument {
    pub fn into_game(self) -> Result<(TypePairGame, Vec<f64>, Vec<f64>), MarketError> {
        let mut matrices = BTreeMap::new();
        for (key, m) in self.matrices {
            let (a, b) = key
                .split_once('|')
                .ok_or_else(|| MarketError::BadLabel(key.clone()))?;
            matrices.insert(
                (a.to_string(), b.to_string()),
                m.into_iter()
                    .map(|r| r.into_iter().map(|[x, y]| (x, y)).collect())
                    .collect(),
            );
        }
        Ok((
            TypePairGame {
                types_i: self.types.clone(),
                types_j: self.types,
                strategies_i: self.strategies.clone(),
                strategies_j: self.strategies,
                matrices,
            },
            self.prior_i,
            self.prior_j,
        ))
    }
}

fn check_prior(side: &'static str, prior: &[f64], expected: usize) -> Result<(), MarketError> {
    if prior.len() != expected {
        return Err(MarketError::PriorLength {
            side,
            expected,
            got: prior.len(),
        });
    }
    let sum: f64 = prior.iter().sum();
    if prior.iter().any(|&p| !(p >= 0.0)) || (sum - 1.0).abs() > PRIOR_TOLERANCE {
        return Err(MarketError::InvalidPrior { side, sum });
    }
    Ok(())
}

/// Entry at `((t_i, s_i), (t_j, s_j))` is
/// `prior_i[t_i] * prior_j[t_j] * payoff(s_i, s_j | t_i, t_j)`, for both
/// payoff components.
pub fn weight_by_priors(base: &TypePairGame, prior_i: &[f64], prior_j: &[f64]) -> Result<CompositionMatrix, MarketError> {
    check_prior("row", prior_i, base.types_i.len())?;
    check_prior("column", prior_j, base.types_j.len())?;
    let (ns_i, ns_j) = (base.strategies_i.len(), base.strategies_j.len());

    let row_labels: Vec<CellLabel> = base
        .types_i
        .iter()
        .flat_map(|t| base.strategies_i.iter().map(move |s| CellLabel::new(t, s)))
        .collect();
    let col_labels: Vec<CellLabel> = base
        .types_j
        .iter()
        .flat_map(|t| base.strategies_j.iter().map(move |s| CellLabel::new(t, s)))
        .collect();
    let mut entries = vec![vec![(0.0, 0.0); col_labels.len()]; row_labels.len()];

    for (ti, type_i) in base.types_i.iter().enumerate() {
        for (tj, type_j) in base.types_j.iter().enumerate() {
            let m = base
                .matrices
                .get(&(type_i.clone(), type_j.clone()))
                .ok_or_else(|| MarketError::MissingTypePairMatrix(type_i.clone(), type_j.clone()))?;
            if m.len() != ns_i || m.iter().any(|r| r.len() != ns_j) {
                return Err(MarketError::MatrixShape(type_i.clone(), type_j.clone()));
            }
            let w = prior_i[ti] * prior_j[tj];
            for (si, row) in m.iter().enumerate() {
                for (sj, &(a, b)) in row.iter().enumerate() {
                    if a < 0.0 || b < 0.0 {
                        return Err(MarketError::NegativePayoff(a.min(b)));
                    }
                    entries[ti * ns_i + si][tj * ns_j + sj] = (w * a, w * b);
                }
            }
        }
    }

    Ok(CompositionMatrix {
        row_labels,
        col_labels,
        entries,
        prior_i: base.types_i.iter().cloned().zip(prior_i.iter().copied()).collect(),
        prior_j: base.types_j.iter().cloned().zip(prior_j.iter().copied()).collect(),
    })
}

/// Identifiers accepted by [`load_published_matrix`].
pub const PUBLISHED_TABLES: [&str; 2] = ["intermediate_2x4", "final_4x4"];

/// One of the published tables, exactly as printed.
pub fn load_published_matrix(id: &str) -> Result<CompositionMatrix, MarketError> {
    let file = match id {
        "intermediate_2x4" => fixtures::INTERMEDIATE_2X4,
        "final_4x4" => fixtures::FINAL_4X4,
        other => return Err(MarketError::UnknownTable(other.into())),
    };
    let mut m = CompositionMatrix::from_csv(&fixtures::read(file)?)?;
    let shares = |types: Vec<String>| -> Vec<(String, f64)> {
        if types.len() == 1 {
            // Row player's type is known in the intermediate table.
            vec![(types[0].clone(), 1.0)]
        } else {
            types.into_iter().zip([LARGE_SHARE, SMALL_SHARE]).collect()
        }
    };
    m.prior_i = shares(m.row_types());
    m.prior_j = shares(m.col_types());
    Ok(m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Quadrant {
    pub row_type: String,
    pub col_type: String,
    /// Sum of `u_i + u_j` over the quadrant's cells.
    pub sum: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadrantReport {
    /// Row-major by type order.
    pub quadrants: Vec<Quadrant>,
    pub system_total: f64,
    /// Share of cells whose payoff pair is not `(0, 0)`.
    pub hit_ratio: f64,
}

impl QuadrantReport {
    pub fn quadrant(&self, row_type: &str, col_type: &str) -> Option<&Quadrant> {
        self.quadrants
            .iter()
            .find(|q| q.row_type == row_type && q.col_type == col_type)
    }
}

// Volumes are rounded to display precision here and nowhere else.
impl Serialize for QuadrantReport {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Doc {
            quadrants: BTreeMap<String, f64>,
            system_total: f64,
            hit_ratio: f64,
        }
        Doc {
            quadrants: self
                .quadrants
                .iter()
                .map(|q| (format!("{}|{}", q.row_type, q.col_type), round1(q.sum)))
                .collect(),
            system_total: round1(self.system_total),
            hit_ratio: self.hit_ratio,
        }
        .serialize(serializer)
    }
}

pub fn quadrant_analysis(matrix: &CompositionMatrix) -> Result<QuadrantReport, MarketError> {
    let row_types = matrix.row_types();
    let col_types = matrix.col_types();
    if row_types.len() != 2 {
        return Err(MarketError::NotTwoTypes {
            axis: "row",
            found: row_types.len(),
        });
    }
    if col_types.len() != 2 {
        return Err(MarketError::NotTwoTypes {
            axis: "column",
            found: col_types.len(),
        });
    }
    let mut quadrants: Vec<Quadrant> = row_types
        .iter()
        .flat_map(|rt| {
            col_types.iter().map(move |ct| Quadrant {
                row_type: rt.clone(),
                col_type: ct.clone(),
                sum: 0.0,
            })
        })
        .collect();
    let mut hits = 0usize;
    let mut cells = 0usize;
    for (rl, cl, (a, b)) in matrix.cells() {
        let r = row_types.iter().position(|t| *t == rl.type_label).expect("row type");
        let c = col_types.iter().position(|t| *t == cl.type_label).expect("col type");
        quadrants[r * 2 + c].sum += a + b;
        cells += 1;
        if a != 0.0 || b != 0.0 {
            hits += 1;
        }
    }
    let system_total = quadrants.iter().map(|q| q.sum).sum();
    Ok(QuadrantReport {
        quadrants,
        system_total,
        hit_ratio: if cells == 0 { 0.0 } else { hits as f64 / cells as f64 },
    })
}

/// Quadrant with the largest volume; ties go to the first in row-major
/// order.
pub fn best_quadrant(report: &QuadrantReport) -> Option<&Quadrant> {
    let mut best: Option<&Quadrant> = None;
    for q in &report.quadrants {
        if best.is_none_or(|b| q.sum > b.sum) {
            best = Some(q);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_type_game(ll: RealBimatrix) -> TypePairGame {
        let zero = vec![vec![(0.0, 0.0); 2]; 2];
        let t = |a: &str, b: &str| (a.to_string(), b.to_string());
        TypePairGame {
            types_i: vec!["L".into(), "s".into()],
            types_j: vec!["L".into(), "s".into()],
            strategies_i: vec!["H".into(), "l".into()],
            strategies_j: vec!["H".into(), "l".into()],
            matrices: [
                (t("L", "L"), ll),
                (t("L", "s"), zero.clone()),
                (t("s", "L"), vec![vec![(10.0, 10.0); 2]; 2]),
                (t("s", "s"), zero),
            ]
            .into_iter()
            .collect(),
        }
    }

    fn large_large() -> RealBimatrix {
        vec![vec![(10.0, 10.0), (0.0, 0.0)], vec![(6.0, 6.0), (5.0, 5.0)]]
    }

    #[test]
    fn weighting_examples() {
        let g = two_type_game(large_large());
        let m = weight_by_priors(&g, &[0.35, 0.65], &[0.35, 0.65]).unwrap();
        let (a, b) = m.entries[0][0];
        assert!((a - 1.225).abs() < 1e-12 && (b - 1.225).abs() < 1e-12);
        assert_eq!(fmt1(a), "1.2");
        // Small row player against a large column player.
        let (a, _) = m.entries[2][0];
        assert!((a - 2.275).abs() < 1e-12);
        assert_eq!(fmt1(a), "2.3");
        assert_eq!(m.row_labels[2], CellLabel::new("s", "H"));

        let degenerate = weight_by_priors(&g, &[1.0, 0.0], &[1.0, 0.0]).unwrap();
        for r in 0..2 {
            for c in 0..2 {
                assert_eq!(degenerate.entries[r][c], large_large()[r][c]);
            }
        }
        assert!(degenerate.entries[2..].iter().flatten().all(|&v| v == (0.0, 0.0)));
    }

    #[test]
    fn weighting_errors() {
        let mut g = two_type_game(large_large());
        assert!(matches!(
            weight_by_priors(&g, &[0.5, 0.6], &[0.5, 0.5]),
            Err(MarketError::InvalidPrior { side: "row", .. })
        ));
        assert!(matches!(
            weight_by_priors(&g, &[1.0], &[0.5, 0.5]),
            Err(MarketError::PriorLength { .. })
        ));
        g.matrices.remove(&("s".to_string(), "L".to_string()));
        assert!(matches!(
            weight_by_priors(&g, &[0.5, 0.5], &[0.5, 0.5]),
            Err(MarketError::MissingTypePairMatrix(a, b)) if a == "s" && b == "L"
        ));
    }

    #[test]
    fn published_tables() {
        let m = load_published_matrix("final_4x4").unwrap();
        assert_eq!(m.entries[0][0], (1.2, 1.2));
        assert_eq!(m.row_labels[3], CellLabel::new("s", "l"));
        assert_eq!(m.entries[3][0], (3.5, 3.1));
        assert_eq!(m.prior_i, vec![("L".to_string(), 0.35), ("s".to_string(), 0.65)]);

        let inter = load_published_matrix("intermediate_2x4").unwrap();
        assert_eq!(inter.entries.len(), 2);
        assert_eq!(inter.entries[1][2], (5.0, 4.4));
        assert_eq!(inter.col_labels[2], CellLabel::new("s", "high"));
        assert!(matches!(quadrant_analysis(&inter), Err(MarketError::NotTwoTypes { axis: "row", found: 1 })));

        assert!(matches!(load_published_matrix("final_5x5"), Err(MarketError::UnknownTable(_))));
    }

    #[test]
    fn published_quadrants() {
        let report = quadrant_analysis(&load_published_matrix("final_4x4").unwrap()).unwrap();
        assert_eq!(tenths(report.quadrant("L", "L").unwrap().sum), 97);
        assert_eq!(tenths(report.quadrant("s", "s").unwrap().sum), 83);
        assert_eq!(tenths(report.quadrant("s", "L").unwrap().sum), 186);
        assert_eq!(tenths(report.quadrant("L", "s").unwrap().sum), 45);
        assert_eq!(tenths(report.system_total), 411);
        assert_eq!(report.hit_ratio, 0.75);
        let best = best_quadrant(&report).unwrap();
        assert_eq!((best.row_type.as_str(), best.col_type.as_str()), ("s", "L"));

        let json = serde_json::to_string(&report).unwrap();
        assert_eq!(
            json,
            r#"{"quadrants":{"L|L":9.7,"L|s":4.5,"s|L":18.6,"s|s":8.3},"system_total":41.1,"hit_ratio":0.75}"#
        );
    }

    #[test]
    fn zero_matrix_and_ties() {
        let g = two_type_game(vec![vec![(0.0, 0.0); 2]; 2]);
        let mut g0 = g.clone();
        g0.matrices.insert(("s".into(), "L".into()), vec![vec![(0.0, 0.0); 2]; 2]);
        let report = quadrant_analysis(&weight_by_priors(&g0, &[0.5, 0.5], &[0.5, 0.5]).unwrap()).unwrap();
        assert!(report.quadrants.iter().all(|q| q.sum == 0.0));
        assert_eq!(report.hit_ratio, 0.0);
        let best = best_quadrant(&report).unwrap();
        assert_eq!((best.row_type.as_str(), best.col_type.as_str()), ("L", "L"));

        let large = two_type_game(vec![vec![(50.0, 50.0); 2]; 2]);
        let report = quadrant_analysis(&weight_by_priors(&large, &[0.5, 0.5], &[0.5, 0.5]).unwrap()).unwrap();
        assert_eq!(best_quadrant(&report).unwrap().row_type, "L");
        assert_eq!(best_quadrant(&report).unwrap().col_type, "L");
    }

    #[test]
    fn csv_round_trip_at_display_precision() {
        let m = load_published_matrix("final_4x4").unwrap();
        let back = CompositionMatrix::from_csv(&m.to_csv()).unwrap();
        assert_eq!(back.entries, m.entries);
        assert_eq!(back.row_labels, m.row_labels);
        assert!(m.volumes_csv().contains("s+l,L+H,3.5,3.1,6.6\n"));
        assert!(matches!(
            CompositionMatrix::from_csv("row_label,col_label,u_i,u_j\nL+H,L+H,1,1\nL+H,s+H,1,1\ns+H,L+H,1,1\n"),
            Err(MarketError::MissingCell(..))
        ));
        assert!(matches!(CellLabel::parse("LH"), Err(MarketError::BadLabel(_))));
    }

    #[test]
    fn constructive_fixture_parses() {
        let doc: TypePairDocument =
            serde_json::from_str(fixtures::bundled(fixtures::MARKET_CONSTRUCTIVE).unwrap()).unwrap();
        let (g, pi, pj) = doc.into_game().unwrap();
        let m = weight_by_priors(&g, &pi, &pj).unwrap();
        assert_eq!(m.entries.len(), 4);
        assert!(quadrant_analysis(&m).is_ok());
    }
}
