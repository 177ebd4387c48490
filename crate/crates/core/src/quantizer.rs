//! Unsaturated rounding quantizer and the zooming-in scale schedule.

use num_bigint::BigInt;
use num_traits::{One, Pow, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::exactmath::{floor, serde_rational, Rational};

/// `ψ` such that `(2ψ-1)/2 ≤ x < (2ψ+1)/2` for `x > -1/2`, and `-q(-x)` for `x ≤ -1/2`.
///
/// Ties round up on the non-negative side and away from zero on the negative side,
/// so the map is odd outside `(-1/2, 1/2)`.
pub fn quantize_scalar(x: &Rational) -> BigInt {
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    if x <= &-half.clone() {
        -quantize_scalar(&-x)
    } else {
        floor(&(x + half))
    }
}

pub fn quantize_vector(x: &[Rational]) -> Vec<BigInt> {
    x.iter().map(quantize_scalar).collect()
}

/// `l(k) = γ^k · l(0)`, shared by every party; nothing about it is transmitted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZoomSchedule {
    #[serde(with = "serde_rational")]
    pub gamma: Rational,
    #[serde(with = "serde_rational")]
    pub l0: Rational,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ZoomError {
    #[error("zoom factor must lie in (0, 1), got {0}")]
    Gamma(Rational),
    #[error("initial scale must be positive, got {0}")]
    InitialScale(Rational),
}

impl ZoomSchedule {
    pub fn new(gamma: Rational, l0: Rational) -> Result<Self, ZoomError> {
        if !gamma.is_positive() || gamma >= Rational::one() {
            return Err(ZoomError::Gamma(gamma));
        }
        if !l0.is_positive() || l0.is_zero() {
            return Err(ZoomError::InitialScale(l0));
        }
        Ok(Self { gamma, l0 })
    }

    pub fn at(&self, k: usize) -> Rational {
        let exp = u32::try_from(k).expect("step index fits in u32");
        Pow::pow(&self.gamma, exp) * &self.l0
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::exactmath::{int, rat};

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn scalar_examples() {
        assert_eq!(quantize_scalar(&rat(1, 2)), BigInt::from(1));
        assert_eq!(quantize_scalar(&rat(49, 100)), BigInt::from(0));
        assert_eq!(quantize_scalar(&rat(-7, 10)), BigInt::from(-1));
        assert_eq!(quantize_scalar(&rat(-1, 2)), BigInt::from(-1));
        assert_eq!(quantize_scalar(&rat(-49, 100)), BigInt::from(0));
        assert_eq!(quantize_scalar(&rat(3, 2)), BigInt::from(2));
        assert_eq!(quantize_scalar(&rat(-3, 2)), BigInt::from(-2));
    }

    #[test]
    fn vector_examples() {
        assert_eq!(quantize_vector(&[int(0), int(0)]), ints(&[0, 0]));
        assert_eq!(quantize_vector(&[rat(3, 2), rat(-1, 2)]), ints(&[2, -1]));
        assert_eq!(quantize_vector(&[int(100), rat(1, 4)]), ints(&[100, 0]));
    }

    #[test]
    fn zoom_examples() {
        let z = ZoomSchedule::new(rat(1, 2), int(1)).unwrap();
        assert_eq!(z.at(0), int(1));
        assert_eq!(z.at(3), rat(1, 8));
        let z = ZoomSchedule::new(rat(1, 2), int(2)).unwrap();
        assert_eq!(z.at(10), rat(2, 1024));
    }

    #[test]
    fn zoom_rejects_bad_parameters() {
        assert!(ZoomSchedule::new(int(1), int(1)).is_err());
        assert!(ZoomSchedule::new(int(0), int(1)).is_err());
        assert!(ZoomSchedule::new(rat(1, 2), int(0)).is_err());
    }

    fn any_rational() -> impl Strategy<Value = Rational> {
        (-100_000i64..100_000, 1i64..1000).prop_map(|(n, d)| rat(n, d))
    }

    proptest! {
        #[test]
        fn error_is_at_most_half(x in any_rational()) {
            let q = Rational::from_integer(quantize_scalar(&x));
            prop_assert!((&x - q).abs() <= rat(1, 2));
        }

        #[test]
        fn interval_membership_and_symmetry(x in any_rational()) {
            let psi = Rational::from_integer(quantize_scalar(&x));
            if x > rat(-1, 2) {
                prop_assert!(&psi - rat(1, 2) <= x && x < &psi + rat(1, 2));
            }
            if x.abs() >= rat(1, 2) {
                prop_assert_eq!(quantize_scalar(&-&x), -quantize_scalar(&x));
            }
        }

        #[test]
        fn zoom_is_geometric(num in 1i64..50, k in 0usize..40) {
            let gamma = rat(num, 51);
            let z = ZoomSchedule::new(gamma.clone(), rat(3, 2)).unwrap();
            prop_assert_eq!(z.at(k + 1), gamma * z.at(k));
        }
    }
}
