use num_traits::Zero;
use thiserror::Error;

use super::{Rational, RationalMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinearSolveError {
    #[error("system has no solution")]
    NoSolution,
    /// Rank-deficient but consistent; `particular` has every free variable set to zero.
    #[error("system has infinitely many solutions (rank {rank} < {unknowns} unknowns)")]
    NonUnique {
        particular: Vec<Rational>,
        rank: usize,
        unknowns: usize,
    },
    #[error("right-hand side has length {got}, expected {expected}")]
    Dimension { expected: usize, got: usize },
}

/// Solves `M x = b` exactly by Gauss-Jordan elimination over the rationals.
pub fn solve_linear_exact(m: &RationalMatrix, b: &[Rational]) -> Result<Vec<Rational>, LinearSolveError> {
    let (rows, cols) = m.shape();
    if b.len() != rows {
        return Err(LinearSolveError::Dimension {
            expected: rows,
            got: b.len(),
        });
    }

    // Augmented matrix, row-major.
    let mut aug: Vec<Vec<Rational>> = (0..rows)
        .map(|i| {
            let mut r = m.row(i).to_vec();
            r.push(b[i].clone());
            r
        })
        .collect();

    let mut pivot_cols = Vec::with_capacity(rows.min(cols));
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !aug[i][c].is_zero()) else {
            continue;
        };
        aug.swap(r, p);
        let inv = aug[r][c].recip();
        for x in aug[r].iter_mut().skip(c) {
            *x *= &inv;
        }
        let pivot_row = aug[r].clone();
        for (i, row) in aug.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let factor = row[c].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row).skip(c) {
                *x -= &factor * p;
            }
        }
        pivot_cols.push(c);
        r += 1;
    }

    let rank = pivot_cols.len();
    if aug[rank..].iter().any(|row| !row[cols].is_zero()) {
        return Err(LinearSolveError::NoSolution);
    }

    let mut x = vec![Rational::zero(); cols];
    for (i, &c) in pivot_cols.iter().enumerate() {
        x[c] = aug[i][cols].clone();
    }
    if rank < cols {
        return Err(LinearSolveError::NonUnique {
            particular: x,
            rank,
            unknowns: cols,
        });
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::exactmath::{int, rat};

    fn mat(rows: Vec<Vec<Rational>>) -> RationalMatrix {
        RationalMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn identity_system() {
        let m = RationalMatrix::identity(2);
        let x = solve_linear_exact(&m, &[rat(3, 2), int(-1)]).unwrap();
        assert_eq!(x, vec![rat(3, 2), int(-1)]);
    }

    #[test]
    fn inconsistent_rows() {
        let m = mat(vec![vec![int(1), int(1)], vec![int(1), int(1)]]);
        assert_eq!(
            solve_linear_exact(&m, &[int(1), int(2)]),
            Err(LinearSolveError::NoSolution)
        );
    }

    #[test]
    fn diagonal_system() {
        let m = mat(vec![vec![int(2), int(0)], vec![int(0), int(4)]]);
        let x = solve_linear_exact(&m, &[int(1), int(1)]).unwrap();
        assert_eq!(x, vec![rat(1, 2), rat(1, 4)]);
    }

    #[test]
    fn rank_deficient_returns_particular_solution() {
        let m = mat(vec![vec![int(1), int(1)], vec![int(2), int(2)]]);
        match solve_linear_exact(&m, &[int(3), int(6)]) {
            Err(LinearSolveError::NonUnique { particular, rank, .. }) => {
                assert_eq!(rank, 1);
                assert_eq!(m.mul_vec(&particular), vec![int(3), int(6)]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn wrong_rhs_length() {
        let m = RationalMatrix::identity(2);
        assert!(matches!(
            solve_linear_exact(&m, &[int(1)]),
            Err(LinearSolveError::Dimension { .. })
        ));
    }

    proptest! {
        #[test]
        fn solution_has_zero_residual(
            n in 1usize..5,
            entries in proptest::collection::vec(-6i64..7, 16),
            rhs in proptest::collection::vec(-20i64..21, 4),
        ) {
            let m = RationalMatrix::from_vec(n, n, entries[..n * n].iter().map(|&x| int(x)).collect()).unwrap();
            let b: Vec<Rational> = rhs[..n].iter().map(|&x| int(x)).collect();
            match solve_linear_exact(&m, &b) {
                Ok(x) => prop_assert_eq!(m.mul_vec(&x), b),
                Err(LinearSolveError::NonUnique { particular, .. }) => prop_assert_eq!(m.mul_vec(&particular), b),
                Err(LinearSolveError::NoSolution) => {}
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            }
        }
    }
}
