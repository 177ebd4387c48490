use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::{DesignArtifacts, DesignError, PlantSpec, RegulatorSolution};
use crate::exactmath::norms::two_norm_bound;
use crate::exactmath::{
    floor, power_sup_norm, rational_to_f64, serde_bigint, serde_rational, spectral_radius, Rational, RationalMatrix,
};
use crate::simloop::{run_plaintext, InitialConditions};

/// Relative inflation of `ρ̂(A_cl)` used for the analytic `(C_ρ, ρ)` pair.
pub const RHO_MARGIN: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundMethod {
    Analytic,
    Empirical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundDetails {
    pub rho_hat: f64,
    pub rho: Option<f64>,
    pub c_rho: Option<f64>,
    /// Upper bound `sqrt(‖B_cl‖₁‖B_cl‖∞)` on the 2-norm.
    pub b_cl_norm: Option<f64>,
    pub initial_term: Option<f64>,
    pub disturbance_term: Option<f64>,
    pub horizon: Option<usize>,
    /// Empirical sup over twice the horizon, used for the divergence check.
    pub sup_double_horizon: Option<f64>,
    /// Largest `‖ū(k) + C_vŪ(k−1)‖∞` seen in the empirical run.
    #[serde(with = "serde_bigint::option")]
    pub observed_combination_max: Option<BigInt>,
    #[serde(with = "serde_bigint")]
    pub c_plus_norm: BigInt,
    #[serde(with = "serde_rational")]
    pub k_norm: Rational,
    #[serde(with = "serde_rational")]
    pub v_kg_norm: Rational,
    pub norm_note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusBound {
    pub method: BoundMethod,
    /// `C_{p,e}` as a float; exact value in `c_pe_exact`.
    pub c_pe: f64,
    #[serde(with = "serde_rational")]
    pub c_pe_exact: Rational,
    /// `2‖C_{v+1}‖∞(2‖K‖∞C_{p,e} + ‖V−KΓ‖∞/(2γ))`; the modulus must exceed it.
    #[serde(with = "serde_rational")]
    pub threshold: Rational,
    /// Smallest integer strictly above `threshold`.
    #[serde(with = "serde_bigint")]
    pub q_min: BigInt,
    pub details: BoundDetails,
}

/// `A_cl = (1/γ)[[A+BK, −BK], [0, A−LC]]`.
pub fn closed_loop_matrix(spec: &PlantSpec, gamma: &Rational) -> RationalMatrix {
    let n = spec.a.rows();
    let bk = spec.b.mul(&spec.k);
    let zero = RationalMatrix::zeros(n, n);
    let neg_bk = bk.scale(&-Rational::one());
    RationalMatrix::block(&[vec![&spec.a_plus_bk(), &neg_bk], vec![&zero, &spec.a_minus_lc()]])
        .expect("square blocks")
        .scale(&gamma.recip())
}

/// `B_cl = [[−B(V−KΓ)/γ, 0], [0, L/γ]]`.
pub fn disturbance_matrix(spec: &PlantSpec, reg: &RegulatorSolution, gamma: &Rational) -> RationalMatrix {
    let n = spec.a.rows();
    let v = spec.s.rows();
    let inv_g = gamma.recip();
    let top = spec.b.mul(&reg.v_minus_k_gamma(spec)).scale(&-inv_g.clone());
    let bottom = spec.l.scale(&inv_g);
    let z = RationalMatrix::zeros(n, v);
    RationalMatrix::block(&[vec![&top, &z], vec![&z, &bottom]]).expect("conformal blocks")
}

fn threshold(art: &DesignArtifacts, spec: &PlantSpec, reg: &RegulatorSolution, c_pe: &Rational) -> Rational {
    let two = Rational::from_integer(BigInt::from(2));
    let c_plus = Rational::from_integer(art.cayley.c_plus_norm());
    let k_norm = spec.k.inf_norm();
    let vkg_norm = reg.v_minus_k_gamma(spec).inf_norm();
    &two * c_plus * (&two * k_norm * c_pe + vkg_norm / (&two * &art.gamma))
}

struct Analytic {
    rho: f64,
    c_rho: f64,
}

/// `(C_ρ, ρ)` with `‖A_cl^k‖ ≤ C_ρ ρ^k` checked over `0 ≤ k ≤ 4n`.
fn analytic_constants(a_cl: &RationalMatrix, rho_hat: f64, n: usize) -> Analytic {
    if a_cl.is_zero() {
        return Analytic { rho: 0.0, c_rho: 1.0 };
    }
    let nilpotent = a_cl.pow(a_cl.rows() as u32).is_zero();
    // A nonzero nilpotent matrix has ρ̂ = 0 but no C_ρ works with ρ = 0.
    let rho = if nilpotent || rho_hat == 0.0 {
        0.5
    } else {
        (rho_hat * (1.0 + RHO_MARGIN)).min((1.0 + rho_hat) / 2.0)
    };
    let summary = power_sup_norm(a_cl, 4 * n);
    let c_rho = summary
        .per_step
        .iter()
        .enumerate()
        .map(|(k, norm)| norm / rho.powi(k as i32))
        .fold(0.0, f64::max);
    Analytic { rho, c_rho }
}

/// Lower bound on the modulus for exact restoration.
///
/// Uses the closed-loop decay constants when `A_cl` is Schur. Otherwise, or when
/// `ρ̂(A_cl)` is within tolerance of 1, falls back to the supremum of
/// `‖[p̄; ē_x]‖∞` observed in a plaintext run from `initial` over `horizon` steps.
/// That run is repeated to `2·horizon`; a supremum more than doubling is reported
/// as divergent.
pub fn compute_modulus_bound(
    art: &DesignArtifacts,
    spec: &PlantSpec,
    reg: &RegulatorSolution,
    initial: &InitialConditions,
    horizon: usize,
) -> Result<ModulusBound, DesignError> {
    let dims = spec.dims()?;
    let a_cl = closed_loop_matrix(spec, &art.gamma);
    let rho_hat = spectral_radius(&a_cl);
    let mut details = BoundDetails {
        rho_hat,
        rho: None,
        c_rho: None,
        b_cl_norm: None,
        initial_term: None,
        disturbance_term: None,
        horizon: None,
        sup_double_horizon: None,
        observed_combination_max: None,
        c_plus_norm: art.cayley.c_plus_norm(),
        k_norm: spec.k.inf_norm(),
        v_kg_norm: reg.v_minus_k_gamma(spec).inf_norm(),
        norm_note: String::new(),
    };

    let (method, c_pe_exact) = if rho_hat < 1.0 - crate::exactmath::norms::SPECTRAL_TOLERANCE {
        let Analytic { rho, c_rho } = analytic_constants(&a_cl, rho_hat, dims.n);
        let b_cl_norm = two_norm_bound(&disturbance_matrix(spec, reg, &art.gamma));
        let gamma = rational_to_f64(&art.gamma);
        let gamma_norm = rational_to_f64(&reg.gamma.inf_norm());
        let initial_term = c_rho
            * ((2 * dims.n) as f64).sqrt()
            * (rational_to_f64(&spec.c_xp0) + gamma_norm * rational_to_f64(&spec.c_vp0))
            / rational_to_f64(&art.zoom.l0);
        let disturbance_term = c_rho * b_cl_norm * ((2 * dims.v) as f64).sqrt() / (2.0 * gamma * (1.0 - rho));
        let c_pe = initial_term.max(disturbance_term);
        details.rho = Some(rho);
        details.c_rho = Some(c_rho);
        details.b_cl_norm = Some(b_cl_norm);
        details.initial_term = Some(initial_term);
        details.disturbance_term = Some(disturbance_term);
        details.norm_note = "2-norms bounded by sqrt(||M||_1 ||M||_inf); C_rho from powers 0..=4n".into();
        let exact = BigRational::from_float(c_pe)
            .ok_or_else(|| DesignError::InvalidParameter(format!("non-finite C_pe {c_pe}")))?;
        (BoundMethod::Analytic, exact)
    } else {
        if horizon == 0 {
            return Err(DesignError::InvalidParameter("empirical bound needs a positive horizon".into()));
        }
        let run = run_plaintext(spec, reg, art, initial, 2 * horizon)
            .map_err(|e| DesignError::Simulation(e.to_string()))?;
        let sup = |upto: usize| {
            run[..=upto]
                .iter()
                .map(|d| d.pe_inf.clone())
                .fold(Rational::zero(), |m, x| if x > m { x } else { m })
        };
        let sup_h = sup(horizon);
        let sup_2h = sup(2 * horizon);
        let two = Rational::from_integer(BigInt::from(2));
        if sup_2h > &two * &sup_h {
            return Err(DesignError::DivergentEmpiricalBound {
                horizon,
                sup_horizon: rational_to_f64(&sup_h),
                sup_double: rational_to_f64(&sup_2h),
            });
        }
        details.horizon = Some(horizon);
        details.sup_double_horizon = Some(rational_to_f64(&sup_2h));
        details.observed_combination_max = run[..=horizon].iter().map(|d| d.figure4_norm.clone()).max();
        details.norm_note = "empirical sup of the exact infinity-norm of [p; e_x]".into();
        (BoundMethod::Empirical, sup_h)
    };

    let threshold = threshold(art, spec, reg, &c_pe_exact);
    let q_min = floor(&threshold) + BigInt::one();
    debug_assert!(Rational::from_integer(q_min.clone()) > threshold);
    Ok(ModulusBound {
        method,
        c_pe: rational_to_f64(&c_pe_exact),
        c_pe_exact,
        threshold,
        q_min,
        details,
    })
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::design::fixtures::{deadbeat, m, ramp};
    use crate::design::{integerize, solve_regulator};
    use crate::exactmath::{int, rat};

    fn ics(xp: Vec<Rational>, vp: Vec<Rational>) -> InitialConditions {
        let (n, v) = (xp.len(), vp.len());
        InitialConditions {
            x_p0: xp,
            v_p0: vp,
            x_hat0: vec![Rational::zero(); n],
            v_hat0: vec![Rational::zero(); v],
        }
    }

    #[test]
    fn ramp_closed_loop_is_marginal() {
        let spec = ramp();
        let a_cl = closed_loop_matrix(&spec, &rat(1, 2));
        let expected = m(vec![
            vec![int(0), int(-1), int(0), int(1)],
            vec![int(0), int(1), int(0), int(0)],
            vec![int(0), int(0), int(0), int(-1)],
            vec![int(0), int(0), int(0), int(1)],
        ]);
        assert_eq!(a_cl, expected);
        assert!((spectral_radius(&a_cl) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn ramp_uses_empirical_path() {
        let spec = ramp();
        let reg = solve_regulator(&spec).unwrap();
        let art = integerize(&spec, &reg, &rat(1, 2), &rat(1, 2), &int(1)).unwrap();
        let b = compute_modulus_bound(&art, &spec, &reg, &ics(vec![int(1), int(1)], vec![int(1), int(0)]), 60)
            .unwrap();
        assert_eq!(b.method, BoundMethod::Empirical);
        // Oracle values for the default initial conditions.
        assert_eq!(b.c_pe_exact, int(30));
        assert_eq!(b.threshold, int(2820));
        assert_eq!(b.q_min, BigInt::from(2821));
        let observed = b.details.observed_combination_max.clone().unwrap();
        assert_eq!(observed, BigInt::from(180));
        assert!(Rational::from_integer(b.q_min.clone()) / int(2) > Rational::from_integer(observed));
        assert!(b.q_min < BigInt::from(1 << 15));
    }

    #[test]
    fn deadbeat_uses_analytic_path() {
        let spec = deadbeat();
        let reg = solve_regulator(&spec).unwrap();
        let art = integerize(&spec, &reg, &rat(1, 2), &rat(1, 2), &int(1)).unwrap();
        let b = compute_modulus_bound(&art, &spec, &reg, &ics(vec![int(1)], vec![int(1)]), 60).unwrap();
        assert_eq!(b.method, BoundMethod::Analytic);
        let d = &b.details;
        assert_eq!(d.rho, Some(0.5));
        assert_eq!(d.c_rho, Some(4.0));
        assert_eq!(d.b_cl_norm, Some(2.0));
        // max{4·√2·2, 4·2·√2/(2·½·½)} = 16√2
        let expected = 16.0 * 2f64.sqrt();
        assert!((b.c_pe - expected).abs() < 1e-12);
        // 2·3·(2·1·C_pe + 1/(2·½))
        let thr = 6.0 * (2.0 * expected + 1.0);
        assert!((rational_to_f64(&b.threshold) - thr).abs() < 1e-9);
        assert_eq!(b.q_min, BigInt::from(thr.floor() as i64 + 1));
    }

    #[test]
    fn zero_closed_loop_closed_form() {
        // A = 0, K = 0, L = 0: A_cl = 0 and ρ = 0, C_ρ = 1.
        let spec = PlantSpec {
            a: m(vec![vec![int(0)]]),
            b: m(vec![vec![int(1)]]),
            c: m(vec![vec![int(1)]]),
            s: m(vec![vec![int(1)]]),
            k: m(vec![vec![int(0)]]),
            l: m(vec![vec![int(0)]]),
            c_xp0: int(2),
            c_vp0: int(3),
        };
        let reg = solve_regulator(&spec).unwrap();
        assert_eq!(reg.v, m(vec![vec![int(1)]]));
        let art = integerize(&spec, &reg, &rat(1, 2), &rat(1, 2), &int(1)).unwrap();
        let b = compute_modulus_bound(&art, &spec, &reg, &ics(vec![int(0)], vec![int(0)]), 10).unwrap();
        assert_eq!(b.method, BoundMethod::Analytic);
        assert_eq!(b.details.rho, Some(0.0));
        assert_eq!(b.details.c_rho, Some(1.0));
        // B_cl = diag(−B·V/γ, 0) = diag(−2, 0): bound 2.
        let init = 2f64.sqrt() * (2.0 + 1.0 * 3.0);
        let dist = 2.0 * 2f64.sqrt() / (2.0 * 0.5);
        assert!((b.c_pe - init.max(dist)).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn q_min_is_monotone_in_initial_bounds(cx in 0i64..20, cv in 0i64..20, dx in 0i64..20, dv in 0i64..20) {
            let mut spec = deadbeat();
            let reg = solve_regulator(&spec).unwrap();
            let art = integerize(&spec, &reg, &rat(1, 2), &rat(1, 2), &int(1)).unwrap();
            let init = ics(vec![int(0)], vec![int(0)]);
            spec.c_xp0 = int(cx);
            spec.c_vp0 = int(cv);
            let lo = compute_modulus_bound(&art, &spec, &reg, &init, 10).unwrap();
            spec.c_xp0 = int(cx + dx);
            spec.c_vp0 = int(cv + dv);
            let hi = compute_modulus_bound(&art, &spec, &reg, &init, 10).unwrap();
            prop_assert!(hi.q_min >= lo.q_min);
            prop_assert!(Rational::from_integer(hi.q_min.clone()) > hi.threshold);
        }
    }
}
