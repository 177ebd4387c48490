//! Matrix-power norms and spectral-radius estimates.
//!
//! Induced 2-norms are not rational in general. They are bounded from above by
//! `‖M‖₂ ≤ sqrt(‖M‖₁ · ‖M‖∞)`, whose square is computed exactly; the bound is
//! tight for diagonal matrices and never below the true value.

use nalgebra::DMatrix;
use num_traits::Zero;

use super::{rational_to_f64, Rational, RationalMatrix};

/// Absolute tolerance the spectral-radius estimate aims for on well-conditioned
/// input. Defective eigenvalues lose accuracy (roughly the square root of machine
/// precision), so callers only use the estimate for warnings and margins.
pub const SPECTRAL_TOLERANCE: f64 = 1e-9;

/// Floating-point spectral radius via the real Schur decomposition.
pub fn spectral_radius(m: &RationalMatrix) -> f64 {
    assert!(m.is_square(), "spectral radius of a non-square matrix");
    let n = m.rows();
    if n == 0 {
        return 0.0;
    }
    let dense = DMatrix::from_row_slice(n, n, m.to_f64().entries());
    dense
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Exact square of the 2-norm upper bound, `‖M‖₁ · ‖M‖∞`.
pub fn two_norm_bound_sq(m: &RationalMatrix) -> Rational {
    m.one_norm() * m.inf_norm()
}

pub fn two_norm_bound(m: &RationalMatrix) -> f64 {
    rational_to_f64(&two_norm_bound_sq(m)).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerNormSummary {
    /// Upper bound on `‖M^k‖₂` for `k = 0..=horizon`.
    pub per_step: Vec<f64>,
    /// Exact `max_k ‖M^k‖₁‖M^k‖∞`.
    pub sup_sq: Rational,
    /// `sqrt(sup_sq)`.
    pub sup: f64,
    pub spectral_radius: f64,
}

/// Supremum of the 2-norm bound of `M^k` over `0 ≤ k ≤ horizon`, plus `ρ̂(M)`.
pub fn power_sup_norm(m: &RationalMatrix, horizon: usize) -> PowerNormSummary {
    assert!(m.is_square(), "power norms of a non-square matrix");
    let mut power = RationalMatrix::identity(m.rows());
    let mut per_step = Vec::with_capacity(horizon + 1);
    let mut sup_sq = Rational::zero();
    for k in 0..=horizon {
        if k > 0 {
            power = power.mul(m);
        }
        let sq = two_norm_bound_sq(&power);
        per_step.push(rational_to_f64(&sq).sqrt());
        if sq > sup_sq {
            sup_sq = sq;
        }
    }
    PowerNormSummary {
        per_step,
        sup: rational_to_f64(&sup_sq).sqrt(),
        sup_sq,
        spectral_radius: spectral_radius(m),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::{int, rat};

    #[test]
    fn zero_matrix_sup_is_identity_term() {
        let s = power_sup_norm(&RationalMatrix::zeros(2, 2), 5);
        assert_eq!(s.sup_sq, int(1));
        assert_eq!(s.sup, 1.0);
        assert_eq!(s.spectral_radius, 0.0);
        assert!(s.per_step[1..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn diagonal_contraction() {
        let m = RationalMatrix::from_rows(vec![vec![rat(1, 2), int(0)], vec![int(0), rat(1, 3)]]).unwrap();
        let s = power_sup_norm(&m, 10);
        assert_eq!(s.sup, 1.0);
        assert!((s.spectral_radius - 0.5).abs() < SPECTRAL_TOLERANCE);
        assert!((s.per_step[3] - 0.125).abs() < 1e-15);
    }

    #[test]
    fn rotation_has_unit_radius() {
        let m = RationalMatrix::from_rows(vec![vec![int(0), int(-1)], vec![int(1), int(0)]]).unwrap();
        assert!((spectral_radius(&m) - 1.0).abs() < SPECTRAL_TOLERANCE);
    }

    #[test]
    fn bound_dominates_true_two_norm() {
        // [[1,1],[0,1]] has 2-norm (1+sqrt5)/2 ≈ 1.618; the bound gives 2.
        let m = RationalMatrix::from_rows(vec![vec![int(1), int(1)], vec![int(0), int(1)]]).unwrap();
        let b = two_norm_bound(&m);
        assert!(b >= (1.0 + 5f64.sqrt()) / 2.0);
        assert_eq!(b, 2.0);
    }
}
