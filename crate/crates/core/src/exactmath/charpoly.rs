use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};

use super::{IntegerMatrix, Rational, RationalMatrix};

/// Monic characteristic polynomial `λ^v + c_{v-1} λ^{v-1} + … + c_0`.
///
/// `coeffs` holds `[c_{v-1}, …, c_0]` (leading 1 implicit), which is exactly the
/// row that multiplies the stacked history `[u(k-1); …; u(k-v)]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharPoly {
    #[serde(with = "super::serde_bigint::vec")]
    pub coeffs: Vec<BigInt>,
}

impl CharPoly {
    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    /// `[1, c_{v-1}, …, c_0]`.
    pub fn with_leading_one(&self) -> Vec<BigInt> {
        std::iter::once(BigInt::one())
            .chain(self.coeffs.iter().cloned())
            .collect()
    }

    /// Evaluates the polynomial at `m` by Horner's rule. Zero for the source matrix.
    pub fn evaluate_at(&self, m: &IntegerMatrix) -> IntegerMatrix {
        let n = m.rows();
        let id = IntegerMatrix::identity(n);
        self.coeffs
            .iter()
            .fold(id.clone(), |acc, c| acc.mul(m).add(&id.scale(c)))
    }
}

/// Faddeev–LeVerrier over exact rationals.
///
/// `M_0 = 0`, `M_k = A M_{k-1} + c_{v-k+1} I`, `c_{v-k} = -tr(A M_k) / k`.
/// For an integer input every coefficient is an integer; this is asserted.
pub fn char_poly_coeffs(m: &IntegerMatrix) -> CharPoly {
    assert!(m.is_square() && m.rows() >= 1, "characteristic polynomial needs a non-empty square matrix");
    let n = m.rows();
    let a = m.to_rational();
    let id = RationalMatrix::identity(n);
    let mut mk = RationalMatrix::zeros(n, n);
    let mut prev = Rational::one();
    let mut coeffs = Vec::with_capacity(n);
    for k in 1..=n {
        mk = a.mul(&mk).add(&id.scale(&prev));
        let c = -a.mul(&mk).trace() / Rational::from_integer(BigInt::from(k));
        assert!(c.is_integer(), "non-integer characteristic coefficient {c}");
        coeffs.push(c.to_integer());
        prev = c;
    }
    CharPoly { coeffs }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn int_mat(rows: Vec<Vec<i64>>) -> IntegerMatrix {
        IntegerMatrix::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(BigInt::from).collect())
                .collect(),
        )
        .unwrap()
    }

    fn coeffs(p: &CharPoly) -> Vec<i64> {
        p.coeffs.iter().map(|c| c.try_into().unwrap()).collect()
    }

    #[test]
    fn identity_two() {
        assert_eq!(coeffs(&char_poly_coeffs(&IntegerMatrix::identity(2))), vec![-2, 1]);
    }

    #[test]
    fn upper_triangular_example() {
        // (λ-3)(λ-2) = λ² - 5λ + 6
        let p = char_poly_coeffs(&int_mat(vec![vec![3, 4], vec![0, 2]]));
        assert_eq!(coeffs(&p), vec![-5, 6]);
        assert_eq!(p.with_leading_one(), vec![1, -5, 6].into_iter().map(BigInt::from).collect::<Vec<_>>());
    }

    #[test]
    fn zero_matrix() {
        assert_eq!(coeffs(&char_poly_coeffs(&IntegerMatrix::zeros(2, 2))), vec![0, 0]);
    }

    #[test]
    fn one_by_one() {
        assert_eq!(coeffs(&char_poly_coeffs(&int_mat(vec![vec![7]]))), vec![-7]);
    }

    /// det(λI - M) for 3x3 by cofactor expansion, compared coefficientwise.
    #[test]
    fn matches_cofactor_expansion_3x3() {
        let m = int_mat(vec![vec![2, -1, 0], vec![1, 3, 4], vec![-2, 0, 1]]);
        let e = |i: usize, j: usize| -> i64 { (&m[(i, j)]).try_into().unwrap() };
        let trace = e(0, 0) + e(1, 1) + e(2, 2);
        let minors = e(0, 0) * e(1, 1) - e(0, 1) * e(1, 0) + e(0, 0) * e(2, 2) - e(0, 2) * e(2, 0)
            + e(1, 1) * e(2, 2)
            - e(1, 2) * e(2, 1);
        let det = e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1))
            - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0))
            + e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0));
        assert_eq!(coeffs(&char_poly_coeffs(&m)), vec![-trace, minors, -det]);
    }

    proptest! {
        #[test]
        fn cayley_hamilton_holds_exactly(
            n in 1usize..=4,
            entries in proptest::collection::vec(-9i64..10, 16),
        ) {
            let m = IntegerMatrix::from_vec(n, n, entries[..n * n].iter().map(|&x| BigInt::from(x)).collect()).unwrap();
            let p = char_poly_coeffs(&m);
            prop_assert_eq!(p.degree(), n);
            prop_assert!(p.evaluate_at(&m).is_zero());
        }
    }
}
