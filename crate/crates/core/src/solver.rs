//! Equilibrium computation for two-player bimatrix games.
//!
//! Mixed equilibria come from support enumeration: for every pair of
//! supports the two indifference systems are solved exactly over the
//! rationals, and a candidate is kept when its probabilities are
//! non-negative and no action outside the supports does better. A support
//! pair is only used when its systems have a unique solution; otherwise it
//! is skipped. Probabilities of zero inside a support are allowed, which is
//! how weakly-dominated actions end up with zero weight.

use std::fmt;

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{self, Rational, Solution};
use crate::game::{PayoffMatrix, PlayerId};

/// Default cap on rows or columns for support enumeration.
pub const DEFAULT_MAX_DIM: usize = 12;

/// Largest matrix side the grid oracle accepts.
pub const ORACLE_MAX_DIM: usize = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolverError {
    #[error("matrix is {rows}x{cols}, exceeding the per-side cap of {cap}")]
    DimensionCapExceeded { rows: usize, cols: usize, cap: usize },
    #[error("profile has {got_i}x{got_j} probabilities but the matrix is {rows}x{cols}")]
    DimensionMismatch {
        rows: usize,
        cols: usize,
        got_i: usize,
        got_j: usize,
    },
    #[error("payoff matrix is empty")]
    EmptyMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PureEquilibrium {
    pub row: usize,
    pub col: usize,
    pub payoffs: (i64, i64),
}

/// A mixed strategy for each player, exact.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MixedProfile {
    pub probs_i: Vec<Rational>,
    pub probs_j: Vec<Rational>,
}

#[derive(Serialize, Deserialize)]
struct MixedProfileDoc {
    probs_i: Vec<String>,
    probs_j: Vec<String>,
}

impl Serialize for MixedProfile {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        MixedProfileDoc {
            probs_i: self.probs_i.iter().map(exact::to_fraction_string).collect(),
            probs_j: self.probs_j.iter().map(exact::to_fraction_string).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MixedProfile {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let doc = MixedProfileDoc::deserialize(deserializer)?;
        let parse = |v: Vec<String>| {
            v.iter()
                .map(|s| exact::parse_fraction(s))
                .collect::<Result<Vec<_>, _>>()
                .map_err(serde::de::Error::custom)
        };
        Ok(MixedProfile {
            probs_i: parse(doc.probs_i)?,
            probs_j: parse(doc.probs_j)?,
        })
    }
}

impl MixedProfile {
    /// Degenerate profile putting all weight on one cell.
    pub fn pure(rows: usize, cols: usize, row: usize, col: usize) -> Self {
        let unit = |n: usize, k: usize| {
            (0..n)
                .map(|i| if i == k { Rational::one() } else { Rational::zero() })
                .collect()
        };
        MixedProfile {
            probs_i: unit(rows, row),
            probs_j: unit(cols, col),
        }
    }

    pub fn support_i(&self) -> Vec<usize> {
        support_of(&self.probs_i)
    }

    pub fn support_j(&self) -> Vec<usize> {
        support_of(&self.probs_j)
    }

    pub fn is_pure(&self) -> bool {
        self.support_i().len() == 1 && self.support_j().len() == 1
    }
}

impl fmt::Display for MixedProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |v: &[Rational]| {
            v.iter()
                .map(exact::to_fraction_string)
                .collect::<Vec<_>>()
                .join(", ")
        };
        write!(f, "p = ({}), q = ({})", show(&self.probs_i), show(&self.probs_j))
    }
}

fn support_of(v: &[Rational]) -> Vec<usize> {
    v.iter()
        .enumerate()
        .filter(|(_, p)| p.is_positive())
        .map(|(i, _)| i)
        .collect()
}

/// Index subsets used as candidate supports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportPair {
    pub support_i: Vec<usize>,
    pub support_j: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strictness {
    Strict,
    Weak,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dominance {
    pub dominated: usize,
    pub dominating: usize,
    pub strictness: Strictness,
}

fn check_nonempty(m: &PayoffMatrix) -> Result<(), SolverError> {
    if m.is_empty() {
        Err(SolverError::EmptyMatrix)
    } else {
        Ok(())
    }
}

/// Every cell where neither player gains by a unilateral deviation, in
/// row-major order.
pub fn find_pure_equilibria(matrix: &PayoffMatrix) -> Vec<PureEquilibrium> {
    let (rows, cols) = (matrix.rows(), matrix.cols());
    let col_best: Vec<i64> = (0..cols)
        .map(|c| (0..rows).map(|r| matrix.row_payoff(r, c)).max().unwrap_or(i64::MIN))
        .collect();
    let row_best: Vec<i64> = (0..rows)
        .map(|r| (0..cols).map(|c| matrix.col_payoff(r, c)).max().unwrap_or(i64::MIN))
        .collect();
    let mut out = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let (ui, uj) = matrix.payoff(r, c);
            if ui >= col_best[c] && uj >= row_best[r] {
                out.push(PureEquilibrium {
                    row: r,
                    col: c,
                    payoffs: (ui, uj),
                });
            }
        }
    }
    out
}

/// All pairwise weak and strict dominance relations among one player's
/// actions. Equal actions weakly dominate each other.
pub fn dominated_actions(matrix: &PayoffMatrix, player: PlayerId) -> Vec<Dominance> {
    let (n, others) = match player {
        PlayerId::I => (matrix.rows(), matrix.cols()),
        PlayerId::J => (matrix.cols(), matrix.rows()),
    };
    let payoff = |own: usize, other: usize| match player {
        PlayerId::I => matrix.row_payoff(own, other),
        PlayerId::J => matrix.col_payoff(other, own),
    };
    let mut out = Vec::new();
    for dominated in 0..n {
        for dominating in (0..n).filter(|&d| d != dominated) {
            let weak = (0..others).all(|o| payoff(dominating, o) >= payoff(dominated, o));
            if !weak {
                continue;
            }
            let strict = (0..others).all(|o| payoff(dominating, o) > payoff(dominated, o));
            out.push(Dominance {
                dominated,
                dominating,
                strictness: if strict { Strictness::Strict } else { Strictness::Weak },
            });
        }
    }
    out
}

/// Lexicographic k-subsets of `0..n`.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..=n - (k - cur.len()) {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    }
    out
}

/// Support pairs in enumeration order: increasing total support size (ties
/// by the row player's size), then lexicographic.
pub fn support_pairs(rows: usize, cols: usize) -> Vec<SupportPair> {
    let mut sizes: Vec<(usize, usize)> = (1..=rows)
        .flat_map(|a| (1..=cols).map(move |b| (a, b)))
        .collect();
    sizes.sort_by_key(|&(a, b)| (a + b, a));
    let mut out = Vec::new();
    for (a, b) in sizes {
        let sj = subsets(cols, b);
        for si in subsets(rows, a) {
            for s in &sj {
                out.push(SupportPair {
                    support_i: si.clone(),
                    support_j: s.clone(),
                });
            }
        }
    }
    out
}

/// Solves for the opponent mix over `mix_support` that makes the player
/// indifferent across `own_support`. `pay(own, opp)` is that player's payoff.
/// Returns the mix (on the support) and the common value.
fn indifference(
    own_support: &[usize],
    mix_support: &[usize],
    pay: impl Fn(usize, usize) -> i64,
) -> Option<(Vec<Rational>, Rational)> {
    let k = mix_support.len();
    let mut a = Vec::with_capacity(own_support.len() + 1);
    let mut b = Vec::with_capacity(own_support.len() + 1);
    for &own in own_support {
        let mut row: Vec<i64> = mix_support.iter().map(|&opp| pay(own, opp)).collect();
        row.push(-1);
        a.push(row);
        b.push(0);
    }
    let mut sum = vec![1; k];
    sum.push(0);
    a.push(sum);
    b.push(1);
    match exact::solve_integer_system(&a, &b) {
        Solution::Unique(mut x) => {
            let v = x.pop().expect("value variable");
            if x.iter().any(Signed::is_negative) {
                None
            } else {
                Some((x, v))
            }
        }
        Solution::NotUnique => None,
    }
}

fn spread(n: usize, support: &[usize], on_support: Vec<Rational>) -> Vec<Rational> {
    let mut full = vec![Rational::zero(); n];
    for (&i, p) in support.iter().zip(on_support) {
        full[i] = p;
    }
    full
}

fn candidate(matrix: &PayoffMatrix, pair: &SupportPair) -> Option<MixedProfile> {
    let (rows, cols) = (matrix.rows(), matrix.cols());
    let (q_s, v_i) = indifference(&pair.support_i, &pair.support_j, |r, c| matrix.row_payoff(r, c))?;
    let (p_s, v_j) = indifference(&pair.support_j, &pair.support_i, |c, r| matrix.col_payoff(r, c))?;
    let q = spread(cols, &pair.support_j, q_s);
    let p = spread(rows, &pair.support_i, p_s);
    let row_vals = row_values(matrix, &q);
    if (0..rows).any(|r| row_vals[r] > v_i) {
        return None;
    }
    let col_vals = col_values(matrix, &p);
    if (0..cols).any(|c| col_vals[c] > v_j) {
        return None;
    }
    Some(MixedProfile { probs_i: p, probs_j: q })
}

/// Expected payoff to player `I` of each row against `q`.
pub fn row_values(matrix: &PayoffMatrix, q: &[Rational]) -> Vec<Rational> {
    (0..matrix.rows())
        .map(|r| {
            q.iter()
                .enumerate()
                .filter(|(_, w)| !w.is_zero())
                .map(|(c, w)| exact::int(matrix.row_payoff(r, c)) * w)
                .sum()
        })
        .collect()
}

/// Expected payoff to player `J` of each column against `p`.
pub fn col_values(matrix: &PayoffMatrix, p: &[Rational]) -> Vec<Rational> {
    (0..matrix.cols())
        .map(|c| {
            p.iter()
                .enumerate()
                .filter(|(_, w)| !w.is_zero())
                .map(|(r, w)| exact::int(matrix.col_payoff(r, c)) * w)
                .sum()
        })
        .collect()
}

/// All mixed equilibria reachable by support enumeration, pure ones
/// included, using the default dimension cap.
pub fn solve_mixed(matrix: &PayoffMatrix) -> Result<Vec<MixedProfile>, SolverError> {
    solve_mixed_capped(matrix, DEFAULT_MAX_DIM)
}

pub fn solve_mixed_capped(matrix: &PayoffMatrix, max_dim: usize) -> Result<Vec<MixedProfile>, SolverError> {
    check_nonempty(matrix)?;
    let (rows, cols) = (matrix.rows(), matrix.cols());
    if rows > max_dim || cols > max_dim {
        return Err(SolverError::DimensionCapExceeded {
            rows,
            cols,
            cap: max_dim,
        });
    }
    let found: Vec<Option<MixedProfile>> = support_pairs(rows, cols)
        .par_iter()
        .map(|pair| candidate(matrix, pair))
        .collect();
    let mut out: Vec<MixedProfile> = Vec::new();
    for profile in found.into_iter().flatten() {
        if !out.contains(&profile) {
            out.push(profile);
        }
    }
    Ok(out)
}

fn is_distribution(v: &[Rational]) -> bool {
    v.iter().all(|p| !p.is_negative()) && v.iter().sum::<Rational>() == Rational::one()
}

/// True when no pure deviation improves either player's expected payoff by
/// more than `tolerance`. Vectors that are not probability distributions
/// never verify.
pub fn verify_equilibrium(
    matrix: &PayoffMatrix,
    profile: &MixedProfile,
    tolerance: &Rational,
) -> Result<bool, SolverError> {
    check_nonempty(matrix)?;
    let (rows, cols) = (matrix.rows(), matrix.cols());
    if profile.probs_i.len() != rows || profile.probs_j.len() != cols {
        return Err(SolverError::DimensionMismatch {
            rows,
            cols,
            got_i: profile.probs_i.len(),
            got_j: profile.probs_j.len(),
        });
    }
    if !is_distribution(&profile.probs_i) || !is_distribution(&profile.probs_j) {
        return Ok(false);
    }
    let gains = deviation_gains(matrix, profile);
    Ok(gains.0 <= *tolerance && gains.1 <= *tolerance)
}

/// Best unilateral improvement available to each player.
pub fn deviation_gains(matrix: &PayoffMatrix, profile: &MixedProfile) -> (Rational, Rational) {
    let rv = row_values(matrix, &profile.probs_j);
    let cv = col_values(matrix, &profile.probs_i);
    let current_i: Rational = rv.iter().zip(&profile.probs_i).map(|(v, p)| v * p).sum();
    let current_j: Rational = cv.iter().zip(&profile.probs_j).map(|(v, q)| v * q).sum();
    let best_i = rv.into_iter().max().expect("nonempty");
    let best_j = cv.into_iter().max().expect("nonempty");
    (best_i - current_i, best_j - current_j)
}

/// A grid point on both simplices, stored as integer counts out of
/// `resolution`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GridProfile {
    pub resolution: u32,
    pub counts_i: Vec<u32>,
    pub counts_j: Vec<u32>,
    /// Largest deviation gain, scaled by `resolution^2`.
    pub scaled_gain: i64,
}

impl GridProfile {
    pub fn probs_i(&self) -> Vec<f64> {
        self.counts_i.iter().map(|&c| c as f64 / self.resolution as f64).collect()
    }

    pub fn probs_j(&self) -> Vec<f64> {
        self.counts_j.iter().map(|&c| c as f64 / self.resolution as f64).collect()
    }

    pub fn max_gain(&self) -> f64 {
        self.scaled_gain as f64 / (self.resolution as f64).powi(2)
    }

    /// Max-norm distance to an exact profile over both vectors.
    pub fn distance_to(&self, profile: &MixedProfile) -> f64 {
        let res = exact::int(self.resolution as i64);
        let side = |counts: &[u32], probs: &[Rational]| {
            counts
                .iter()
                .zip(probs)
                .map(|(&c, p)| exact::to_f64(&(exact::int(c as i64) / &res - p)).abs())
                .fold(0.0, f64::max)
        };
        side(&self.counts_i, &profile.probs_i).max(side(&self.counts_j, &profile.probs_j))
    }
}

/// Compositions of `total` into `parts` non-negative integers, lexicographic.
fn compositions(total: u32, parts: usize, mut visit: impl FnMut(&[u32])) {
    fn rec(rem: u32, idx: usize, cur: &mut Vec<u32>, visit: &mut dyn FnMut(&[u32])) {
        if idx + 1 == cur.len() {
            cur[idx] = rem;
            visit(cur);
            return;
        }
        for v in 0..=rem {
            cur[idx] = v;
            rec(rem - v, idx + 1, cur, visit);
        }
    }
    let mut cur = vec![0; parts];
    rec(total, 0, &mut cur, &mut visit);
}

/// Exhaustive grid search for approximate equilibria: every pair of points
/// on the two simplices (step `1/resolution`) whose largest unilateral
/// deviation gain is strictly below `1/resolution`. Output is ordered by
/// the column player's grid point, then the row player's.
///
/// All arithmetic is in integers scaled by `resolution`, so membership is
/// exact. This is a test oracle and is independent of the support
/// enumeration in [`solve_mixed`].
pub fn brute_force_oracle(matrix: &PayoffMatrix, resolution: u32) -> Result<Vec<GridProfile>, SolverError> {
    check_nonempty(matrix)?;
    let (rows, cols) = (matrix.rows(), matrix.cols());
    if rows > ORACLE_MAX_DIM || cols > ORACLE_MAX_DIM {
        return Err(SolverError::DimensionCapExceeded {
            rows,
            cols,
            cap: ORACLE_MAX_DIM,
        });
    }
    assert!(resolution > 0, "grid resolution must be positive");
    let res = resolution as i64;

    // Split the column player's simplex on its first coordinate.
    let chunks: Vec<Vec<GridProfile>> = (0..=resolution)
        .into_par_iter()
        .map(|first| {
            let mut found = Vec::new();
            let mut visit = |tail: &[u32]| {
                let mut k = Vec::with_capacity(cols);
                k.push(first);
                k.extend_from_slice(tail);
                scan_row_side(matrix, res, &k, &mut found);
            };
            if cols == 1 {
                if first == resolution {
                    visit(&[]);
                }
            } else {
                compositions(resolution - first, cols - 1, &mut visit);
            }
            found
        })
        .collect();
    Ok(chunks.into_iter().flatten().collect())
}

/// For a fixed column mix `k`, enumerate row mixes `m` with both players'
/// gains under budget.
///
/// With `k` fixed, each player's gain is linear in `m`: the row player's is
/// `sum_r m_r * gap_r` and the column player's gain from switching to
/// column `c` is `sum_r m_r * (res * v_rc - w_r)`, all scaled by `res^2`.
/// A partial `m` is abandoned once some constraint must fail however the
/// remaining mass is spread.
fn scan_row_side(matrix: &PayoffMatrix, res: i64, k: &[u32], found: &mut Vec<GridProfile>) {
    let (rows, cols) = (matrix.rows(), matrix.cols());
    let row_pay: Vec<i64> = (0..rows)
        .map(|r| (0..cols).map(|c| matrix.row_payoff(r, c) * k[c] as i64).sum())
        .collect();
    let best = *row_pay.iter().max().expect("nonempty");

    // coeffs[0] is the row player's constraint, coeffs[1 + c] column c's.
    let mut coeffs = vec![row_pay.iter().map(|&v| best - v).collect::<Vec<i64>>()];
    let w: Vec<i64> = (0..rows)
        .map(|r| (0..cols).map(|c| matrix.col_payoff(r, c) * k[c] as i64).sum())
        .collect();
    for c in 0..cols {
        coeffs.push((0..rows).map(|r| res * matrix.col_payoff(r, c) - w[r]).collect());
    }
    // suffix_min[x][idx] = min over rows >= idx.
    let suffix_min: Vec<Vec<i64>> = coeffs
        .iter()
        .map(|a| {
            let mut out = a.clone();
            for r in (0..rows.saturating_sub(1)).rev() {
                out[r] = out[r].min(out[r + 1]);
            }
            out
        })
        .collect();

    struct Scan<'a> {
        coeffs: &'a [Vec<i64>],
        suffix_min: &'a [Vec<i64>],
        res: i64,
        m: Vec<u32>,
        sums: Vec<i64>,
    }

    impl Scan<'_> {
        fn rec(&mut self, idx: usize, rem: u32, k: &[u32], found: &mut Vec<GridProfile>) {
            let rem_i = rem as i64;
            if self
                .sums
                .iter()
                .zip(self.suffix_min)
                .any(|(&s, mins)| s + rem_i * mins[idx] >= self.res)
            {
                return;
            }
            if idx + 1 == self.m.len() {
                self.m[idx] = rem;
                let gains = self.sums.iter().zip(self.coeffs).map(|(&s, a)| s + rem_i * a[idx]);
                let row_gain = self.sums[0] + rem_i * self.coeffs[0][idx];
                let col_gain = gains.skip(1).max().expect("at least one column");
                found.push(GridProfile {
                    resolution: self.res as u32,
                    counts_i: self.m.clone(),
                    counts_j: k.to_vec(),
                    scaled_gain: row_gain.max(col_gain),
                });
                self.m[idx] = 0;
                return;
            }
            // With v at idx and the rest at its cheapest, constraint x is
            // sums[x] + rem * min_x + v * (a_x[idx] - min_x); keep v where
            // every such bound stays under budget.
            let (mut lo, mut hi) = (0i64, rem_i);
            for ((&s, a), mins) in self.sums.iter().zip(self.coeffs).zip(self.suffix_min) {
                let t = self.res - s - rem_i * mins[idx + 1];
                let d = a[idx] - mins[idx + 1];
                match d.signum() {
                    0 if t <= 0 => return,
                    1 => hi = hi.min((t - 1).div_euclid(d)),
                    -1 => lo = lo.max((-t).div_euclid(-d) + 1),
                    _ => {}
                }
            }
            if lo > hi {
                return;
            }
            for v in lo as u32..=hi as u32 {
                self.m[idx] = v;
                for (s, a) in self.sums.iter_mut().zip(self.coeffs) {
                    *s += v as i64 * a[idx];
                }
                self.rec(idx + 1, rem - v, k, found);
                for (s, a) in self.sums.iter_mut().zip(self.coeffs) {
                    *s -= v as i64 * a[idx];
                }
            }
            self.m[idx] = 0;
        }
    }

    let mut scan = Scan {
        coeffs: &coeffs,
        suffix_min: &suffix_min,
        res,
        m: vec![0; rows],
        sums: vec![0; coeffs.len()],
    };
    scan.rec(0, res as u32, k, found);
}
