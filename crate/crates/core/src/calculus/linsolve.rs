use num_traits::{One, Zero};
use thiserror::Error;

use crate::scalar::{ParamScalar, Rational};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SolveError {
    #[error("inconsistent linear system")]
    Inconsistent,
    #[error("linear system has a {0}-dimensional solution space")]
    Underdetermined(usize),
}

/// Solves `A x = b` for a rational matrix `A` (rows given as sparse
/// `(column, value)` lists) and parameter-valued right-hand side. Requires a
/// unique solution; pivots are always nonzero rationals.
pub fn solve_rational(
    n_cols: usize,
    rows: &[Vec<(usize, Rational)>],
    rhs: &[ParamScalar],
) -> Result<Vec<ParamScalar>, SolveError> {
    assert_eq!(rows.len(), rhs.len());
    let mut a: Vec<Vec<Rational>> = rows
        .iter()
        .map(|r| {
            let mut dense = vec![Rational::zero(); n_cols];
            for (c, v) in r {
                dense[*c] += v;
            }
            dense
        })
        .collect();
    let mut b: Vec<ParamScalar> = rhs.to_vec();
    let mut pivot_row_of = vec![usize::MAX; n_cols];
    let mut row = 0;
    for col in 0..n_cols {
        let Some(p) = (row..a.len()).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(row, p);
        b.swap(row, p);
        let inv = Rational::one() / &a[row][col];
        for v in a[row].iter_mut() {
            *v *= &inv;
        }
        b[row] = b[row].scale(&inv);
        for r in 0..a.len() {
            if r == row || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for c in col..n_cols {
                let delta = &factor * &a[row][c];
                a[r][c] -= delta;
            }
            let delta = b[row].scale(&factor);
            b[r] -= &delta;
        }
        pivot_row_of[col] = row;
        row += 1;
    }
    if b[row..].iter().any(|v| !v.is_zero()) {
        return Err(SolveError::Inconsistent);
    }
    if row < n_cols {
        return Err(SolveError::Underdetermined(n_cols - row));
    }
    Ok(pivot_row_of.into_iter().map(|r| b[r].clone()).collect())
}
