//! Exact rational arithmetic helpers.

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{CheckedDiv, CheckedMul, CheckedSub, One, Zero};

/// Rational type used in every public equilibrium value.
pub type Rational = BigRational;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Renders as `num/den`, including integers (`1/1`, `0/1`).
pub fn to_fraction_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Accepts `num/den` or a bare integer.
pub fn parse_fraction(s: &str) -> Result<Rational, String> {
    let s = s.trim();
    let (n, d) = s.split_once('/').unwrap_or((s, "1"));
    let n: BigInt = n.trim().parse().map_err(|_| format!("bad numerator in {s:?}"))?;
    let d: BigInt = d.trim().parse().map_err(|_| format!("bad denominator in {s:?}"))?;
    if d.is_zero() {
        return Err(format!("zero denominator in {s:?}"));
    }
    Ok(Rational::new(n, d))
}

pub fn to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

pub(crate) fn widen(r: &Ratio<i128>) -> Rational {
    Rational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Overflow;

/// Outcome of solving a square-or-tall linear system.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Solution<T> {
    Unique(Vec<T>),
    /// Inconsistent, or consistent with free variables.
    NotUnique,
}

/// Gauss-Jordan elimination on an augmented matrix `[A | b]` with `n`
/// unknowns (the last column is `b`). Uses checked arithmetic so the caller
/// can retry in wider precision.
pub(crate) fn solve_augmented<T>(mut m: Vec<Vec<T>>, n: usize) -> Result<Solution<T>, Overflow>
where
    T: Clone + Zero + One + PartialEq + CheckedMul + CheckedSub + CheckedDiv,
{
    let rows = m.len();
    let mut pivot_row = 0;
    for col in 0..n {
        let Some(p) = (pivot_row..rows).find(|&r| !m[r][col].is_zero()) else {
            return Ok(Solution::NotUnique);
        };
        m.swap(pivot_row, p);
        let pivot = m[pivot_row][col].clone();
        for c in col..=n {
            m[pivot_row][c] = m[pivot_row][c].checked_div(&pivot).ok_or(Overflow)?;
        }
        for r in 0..rows {
            if r == pivot_row || m[r][col].is_zero() {
                continue;
            }
            let factor = m[r][col].clone();
            for c in col..=n {
                let delta = factor.checked_mul(&m[pivot_row][c]).ok_or(Overflow)?;
                m[r][c] = m[r][c].checked_sub(&delta).ok_or(Overflow)?;
            }
        }
        pivot_row += 1;
    }
    // Any leftover row must read 0 = 0.
    if m[pivot_row..].iter().any(|row| !row[n].is_zero()) {
        return Ok(Solution::NotUnique);
    }
    Ok(Solution::Unique(m.into_iter().take(n).map(|row| row[n].clone()).collect()))
}

/// Solves an integer system exactly, in `i128` rationals when that suffices.
pub(crate) fn solve_integer_system(a: &[Vec<i64>], b: &[i64]) -> Solution<Rational> {
    let n = a.first().map_or(0, Vec::len);
    let narrow: Vec<Vec<Ratio<i128>>> = a
        .iter()
        .zip(b)
        .map(|(row, &rhs)| {
            row.iter()
                .chain(std::iter::once(&rhs))
                .map(|&v| Ratio::from_integer(v as i128))
                .collect()
        })
        .collect();
    match solve_augmented(narrow, n) {
        Ok(Solution::Unique(x)) => Solution::Unique(x.iter().map(widen).collect()),
        Ok(Solution::NotUnique) => Solution::NotUnique,
        Err(Overflow) => {
            let wide: Vec<Vec<Rational>> = a
                .iter()
                .zip(b)
                .map(|(row, &rhs)| row.iter().chain(std::iter::once(&rhs)).map(|&v| int(v)).collect())
                .collect();
            solve_augmented(wide, n).expect("big rationals do not overflow")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fraction_strings() {
        assert_eq!(to_fraction_string(&frac(2, 6)), "1/3");
        assert_eq!(to_fraction_string(&int(0)), "0/1");
        assert_eq!(to_fraction_string(&int(1)), "1/1");
        assert_eq!(parse_fraction("1/6").unwrap(), frac(1, 6));
        assert_eq!(parse_fraction(" 2 ").unwrap(), int(2));
        assert!(parse_fraction("1/0").is_err());
        assert!(parse_fraction("x").is_err());
    }

    #[test]
    fn solves_three_by_three_indifference() {
        // 3q3 = v, 2q3 + 2q2 = v, q3 + q2 + q1 = v, q3 + q2 + q1 = 1
        let a = vec![
            vec![3, 0, 0, -1],
            vec![2, 2, 0, -1],
            vec![1, 1, 1, -1],
            vec![1, 1, 1, 0],
        ];
        let b = vec![0, 0, 0, 1];
        assert_eq!(
            solve_integer_system(&a, &b),
            Solution::Unique(vec![frac(1, 3), frac(1, 6), frac(1, 2), int(1)])
        );
    }

    #[test]
    fn detects_singular_and_inconsistent() {
        assert_eq!(solve_integer_system(&[vec![1, 1], vec![2, 2]], &[1, 2]), Solution::NotUnique);
        assert_eq!(solve_integer_system(&[vec![1], vec![1]], &[1, 2]), Solution::NotUnique);
        // Tall but consistent.
        assert_eq!(
            solve_integer_system(&[vec![1], vec![2]], &[3, 6]),
            Solution::Unique(vec![int(3)])
        );
    }

    #[test]
    fn overflow_falls_back_to_big_rationals() {
        let big = i64::MAX / 3;
        let a = vec![vec![big, 1, 0], vec![1, big, 1], vec![0, 1, big]];
        let b = vec![1, 2, 3];
        let Solution::Unique(x) = solve_integer_system(&a, &b) else {
            panic!("system is nonsingular");
        };
        // Substitute back.
        for (row, rhs) in a.iter().zip(&b) {
            let lhs: Rational = row.iter().zip(&x).map(|(&c, v)| int(c) * v).sum();
            assert_eq!(lhs, int(*rhs));
        }
    }
}
