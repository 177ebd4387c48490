//! Controller synthesis: regulator equations, integerization, Cayley–Hamilton
//! coefficients and the lower bound on the modulus.

mod bound;
mod report;

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactmath::{
    char_poly_coeffs, format_rational, rational_to_f64, serde_bigint, serde_integer_matrix, serde_rational,
    solve_linear_exact, spectral_radius, IntegerMatrix, LinearSolveError, Rational, RationalMatrix,
};
use crate::quantizer::ZoomSchedule;

pub use bound::{compute_modulus_bound, BoundDetails, BoundMethod, ModulusBound, RHO_MARGIN};
pub use report::{screen_candidates, validate_design, CandidateOutcome, CheckRow, CheckStatus, DesignReport};

/// Slack for comparing γ against the spectral-radius floor.
pub const STABILITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DesignError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("regulator equations have no solution")]
    NoSolution,
    #[error("integerization failed: {}", format_entries(.0))]
    IntegerizationFailure(Vec<NonIntegerEntry>),
    #[error("gamma = {gamma} is below the spectral-radius floor {floor}")]
    StabilityMarginViolation { gamma: f64, floor: f64 },
    #[error(
        "empirical bound diverges: sup over {horizon} steps is {sup_horizon}, over {} steps {sup_double}",
        2 * .horizon
    )]
    DivergentEmpiricalBound {
        horizon: usize,
        sup_horizon: f64,
        sup_double: f64,
    },
    #[error("simulation: {0}")]
    Simulation(String),
}

fn format_entries(entries: &[NonIntegerEntry]) -> String {
    entries.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonIntegerEntry {
    pub matrix: String,
    pub row: usize,
    pub col: usize,
    #[serde(with = "serde_rational")]
    pub value: Rational,
}

impl fmt::Display for NonIntegerEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}][{}] = {}", self.matrix, self.row, self.col, format_rational(&self.value))
    }
}

/// Plant `x⁺ = Ax + Bu, y = Cx`, exosystem `v⁺ = Sv`, gains `K`, `L`, and bounds
/// on the initial plant and reference states.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantSpec {
    #[serde(with = "serde_rational::matrix")]
    pub a: RationalMatrix,
    #[serde(with = "serde_rational::matrix")]
    pub b: RationalMatrix,
    #[serde(with = "serde_rational::matrix")]
    pub c: RationalMatrix,
    #[serde(with = "serde_rational::matrix")]
    pub s: RationalMatrix,
    #[serde(with = "serde_rational::matrix")]
    pub k: RationalMatrix,
    #[serde(with = "serde_rational::matrix")]
    pub l: RationalMatrix,
    #[serde(with = "serde_rational")]
    pub c_xp0: Rational,
    #[serde(with = "serde_rational")]
    pub c_vp0: Rational,
}

/// State, input and reference dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub n: usize,
    pub w: usize,
    pub v: usize,
}

impl PlantSpec {
    pub fn dims(&self) -> Result<Dims, DesignError> {
        let n = self.a.rows();
        let w = self.b.cols();
        let v = self.s.rows();
        let expect = |name: &str, m: &RationalMatrix, shape: (usize, usize)| {
            if m.shape() == shape {
                Ok(())
            } else {
                Err(DesignError::Dimension(format!(
                    "{name} is {}x{}, expected {}x{}",
                    m.rows(),
                    m.cols(),
                    shape.0,
                    shape.1
                )))
            }
        };
        if n == 0 || w == 0 || v == 0 {
            return Err(DesignError::Dimension("A, B and S must be non-empty".into()));
        }
        expect("A", &self.a, (n, n))?;
        expect("B", &self.b, (n, w))?;
        expect("C", &self.c, (v, n))?;
        expect("S", &self.s, (v, v))?;
        expect("K", &self.k, (w, n))?;
        expect("L", &self.l, (n, v))?;
        if self.c_xp0.is_negative() || self.c_vp0.is_negative() {
            return Err(DesignError::InvalidParameter("initial-state bounds must be non-negative".into()));
        }
        Ok(Dims { n, w, v })
    }

    pub fn a_plus_bk(&self) -> RationalMatrix {
        self.a.add(&self.b.mul(&self.k))
    }

    pub fn a_minus_lc(&self) -> RationalMatrix {
        self.a.sub(&self.l.mul(&self.c))
    }
}

/// `(Γ, V)` with `ΓS = AΓ + BV` and `CΓ = I`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegulatorSolution {
    #[serde(with = "serde_rational::matrix")]
    pub gamma: RationalMatrix,
    #[serde(with = "serde_rational::matrix")]
    pub v: RationalMatrix,
    /// False when the equations are rank deficient and one solution was picked.
    pub unique: bool,
}

impl RegulatorSolution {
    /// `(ΓS − AΓ − BV, CΓ − I)`.
    pub fn residuals(&self, spec: &PlantSpec) -> (RationalMatrix, RationalMatrix) {
        let r1 = self
            .gamma
            .mul(&spec.s)
            .sub(&spec.a.mul(&self.gamma))
            .sub(&spec.b.mul(&self.v));
        let r2 = spec.c.mul(&self.gamma).sub(&RationalMatrix::identity(spec.s.rows()));
        (r1, r2)
    }

    pub fn v_minus_k_gamma(&self, spec: &PlantSpec) -> RationalMatrix {
        self.v.sub(&spec.k.mul(&self.gamma))
    }
}

/// Unknowns are `vec(Γ)` (row-major, n·v entries) followed by `vec(V)` (w·v).
pub fn solve_regulator(spec: &PlantSpec) -> Result<RegulatorSolution, DesignError> {
    let Dims { n, w, v } = spec.dims()?;
    let g_idx = |i: usize, j: usize| i * v + j;
    let v_idx = |i: usize, j: usize| n * v + i * v + j;
    let unknowns = n * v + w * v;
    let equations = n * v + v * v;
    let mut m = RationalMatrix::zeros(equations, unknowns);
    let mut rhs = vec![Rational::zero(); equations];

    // (ΓS − AΓ − BV)[i][j] = 0
    for i in 0..n {
        for j in 0..v {
            let e = i * v + j;
            for k in 0..v {
                m[(e, g_idx(i, k))] += &spec.s[(k, j)];
            }
            for k in 0..n {
                m[(e, g_idx(k, j))] -= &spec.a[(i, k)];
            }
            for k in 0..w {
                m[(e, v_idx(k, j))] -= &spec.b[(i, k)];
            }
        }
    }
    // (CΓ)[i][j] = δ_ij
    for i in 0..v {
        for j in 0..v {
            let e = n * v + i * v + j;
            for k in 0..n {
                m[(e, g_idx(k, j))] += &spec.c[(i, k)];
            }
            if i == j {
                rhs[e] = Rational::one();
            }
        }
    }

    let (x, unique) = match solve_linear_exact(&m, &rhs) {
        Ok(x) => (x, true),
        Err(LinearSolveError::NonUnique { particular, .. }) => (particular, false),
        Err(LinearSolveError::NoSolution) => return Err(DesignError::NoSolution),
        Err(e @ LinearSolveError::Dimension { .. }) => return Err(DesignError::Dimension(e.to_string())),
    };
    let gamma = RationalMatrix::from_vec(n, v, x[..n * v].to_vec()).expect("shape");
    let vm = RationalMatrix::from_vec(w, v, x[n * v..].to_vec()).expect("shape");
    Ok(RegulatorSolution { gamma, v: vm, unique })
}

/// `C_v = [c_{v-1} … c_0]` of `det(λI − S/γ)` and `C_{v+1} = [1, C_v]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CayleyCoefficients {
    pub v: usize,
    #[serde(with = "serde_bigint::vec")]
    pub c: Vec<BigInt>,
    #[serde(with = "serde_bigint::vec")]
    pub c_plus: Vec<BigInt>,
}

impl CayleyCoefficients {
    pub fn of(s_gamma: &IntegerMatrix) -> Self {
        let p = char_poly_coeffs(s_gamma);
        Self {
            v: p.degree(),
            c_plus: p.with_leading_one(),
            c: p.coeffs,
        }
    }

    /// `‖C_{v+1}‖∞`, the absolute sum of the row.
    pub fn c_plus_norm(&self) -> BigInt {
        self.c_plus.iter().map(|c| c.abs()).sum()
    }

    /// `S̄^v + c_{v-1}S̄^{v-1} + … + c_0 I`.
    pub fn residual(&self, s_gamma: &IntegerMatrix) -> IntegerMatrix {
        let id = IntegerMatrix::identity(s_gamma.rows());
        self.c.iter().fold(id.clone(), |acc, c| acc.mul(s_gamma).add(&id.scale(c)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityCheck {
    pub rho_a_bk: f64,
    pub rho_a_lc: f64,
    pub floor: f64,
    pub gamma: f64,
    /// γ equals the floor within [`STABILITY_TOLERANCE`].
    pub waiver: bool,
}

impl StabilityCheck {
    pub fn evaluate(spec: &PlantSpec, gamma: &Rational) -> Self {
        let rho_a_bk = spectral_radius(&spec.a_plus_bk());
        let rho_a_lc = spectral_radius(&spec.a_minus_lc());
        let floor = rho_a_bk.max(rho_a_lc);
        let g = rational_to_f64(gamma);
        Self {
            rho_a_bk,
            rho_a_lc,
            floor,
            gamma: g,
            waiver: (g - floor).abs() <= STABILITY_TOLERANCE,
        }
    }

    pub fn violated(&self) -> bool {
        self.gamma < self.floor - STABILITY_TOLERANCE
    }
}

/// Integer data of the controller after scaling by `γ` and `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignArtifacts {
    #[serde(with = "serde_rational")]
    pub gamma: Rational,
    #[serde(with = "serde_rational")]
    pub s: Rational,
    pub zoom: ZoomSchedule,
    /// `(A − LC)/γ`
    #[serde(with = "serde_integer_matrix")]
    pub a_lc: IntegerMatrix,
    /// `sB/γ`
    #[serde(with = "serde_integer_matrix")]
    pub b: IntegerMatrix,
    /// `sL/γ`
    #[serde(with = "serde_integer_matrix")]
    pub l: IntegerMatrix,
    /// `S/γ`
    #[serde(with = "serde_integer_matrix")]
    pub s_gamma: IntegerMatrix,
    /// `S/s`
    #[serde(with = "serde_integer_matrix")]
    pub s_s: IntegerMatrix,
    /// `K/s`
    #[serde(with = "serde_integer_matrix")]
    pub k: IntegerMatrix,
    /// `(V − KΓ)/s`
    #[serde(with = "serde_integer_matrix")]
    pub v_kg: IntegerMatrix,
    /// `s/γ`
    #[serde(with = "serde_bigint")]
    pub s_over_gamma: BigInt,
    pub cayley: CayleyCoefficients,
    pub stability: StabilityCheck,
    pub bound: Option<ModulusBound>,
}

struct Scaled {
    name: &'static str,
    value: RationalMatrix,
}

fn scaled_matrices(spec: &PlantSpec, reg: &RegulatorSolution, gamma: &Rational, s: &Rational) -> Vec<Scaled> {
    let inv_g = gamma.recip();
    let inv_s = s.recip();
    let s_g = s / gamma;
    vec![
        Scaled { name: "(A-LC)/gamma", value: spec.a_minus_lc().scale(&inv_g) },
        Scaled { name: "sB/gamma", value: spec.b.scale(&s_g) },
        Scaled { name: "sL/gamma", value: spec.l.scale(&s_g) },
        Scaled { name: "S/gamma", value: spec.s.scale(&inv_g) },
        Scaled { name: "s/gamma", value: RationalMatrix::from_vec(1, 1, vec![s_g.clone()]).expect("1x1") },
        Scaled { name: "S/s", value: spec.s.scale(&inv_s) },
        Scaled { name: "K/s", value: spec.k.scale(&inv_s) },
        Scaled { name: "(V-KGamma)/s", value: reg.v_minus_k_gamma(spec).scale(&inv_s) },
    ]
}

/// Every non-integer entry across the scaled controller matrices, in a fixed order.
pub fn integrality_failures(
    spec: &PlantSpec,
    reg: &RegulatorSolution,
    gamma: &Rational,
    s: &Rational,
) -> Vec<(String, Vec<NonIntegerEntry>)> {
    scaled_matrices(spec, reg, gamma, s)
        .into_iter()
        .map(|m| {
            let bad = m
                .value
                .non_integer_entries()
                .into_iter()
                .map(|(row, col, value)| NonIntegerEntry {
                    matrix: m.name.to_string(),
                    row,
                    col,
                    value,
                })
                .collect();
            (m.name.to_string(), bad)
        })
        .collect()
}

fn check_unit_interval(name: &str, x: &Rational) -> Result<(), DesignError> {
    if !x.is_positive() || x >= &Rational::one() {
        return Err(DesignError::InvalidParameter(format!(
            "{name} must lie in (0, 1), got {}",
            format_rational(x)
        )));
    }
    Ok(())
}

/// Scales the controller into integer matrices.
///
/// Integrality is checked before the stability margin, so a non-integer result
/// is reported even when γ also violates the margin.
pub fn integerize(
    spec: &PlantSpec,
    reg: &RegulatorSolution,
    gamma: &Rational,
    s: &Rational,
    l0: &Rational,
) -> Result<DesignArtifacts, DesignError> {
    spec.dims()?;
    check_unit_interval("gamma", gamma)?;
    check_unit_interval("s", s)?;
    let zoom = ZoomSchedule::new(gamma.clone(), l0.clone())
        .map_err(|e| DesignError::InvalidParameter(e.to_string()))?;

    let failures: Vec<NonIntegerEntry> = integrality_failures(spec, reg, gamma, s)
        .into_iter()
        .flat_map(|(_, bad)| bad)
        .collect();
    if !failures.is_empty() {
        return Err(DesignError::IntegerizationFailure(failures));
    }

    let stability = StabilityCheck::evaluate(spec, gamma);
    if stability.violated() {
        return Err(DesignError::StabilityMarginViolation {
            gamma: stability.gamma,
            floor: stability.floor,
        });
    }

    let mut ints = scaled_matrices(spec, reg, gamma, s)
        .into_iter()
        .map(|m| m.value.to_integer().expect("integrality checked"));
    let mut next = || ints.next().expect("eight scaled matrices");
    let a_lc = next();
    let b = next();
    let l = next();
    let s_gamma = next();
    let s_over_gamma = next()[(0, 0)].clone();
    let s_s = next();
    let k = next();
    let v_kg = next();
    let cayley = CayleyCoefficients::of(&s_gamma);

    Ok(DesignArtifacts {
        gamma: gamma.clone(),
        s: s.clone(),
        zoom,
        a_lc,
        b,
        l,
        s_gamma,
        s_s,
        k,
        v_kg,
        s_over_gamma,
        cayley,
        stability,
        bound: None,
    })
}


#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::fixtures::*;
    use super::*;
    use crate::exactmath::{int, rat};

    fn imat(rows: Vec<Vec<i64>>) -> IntegerMatrix {
        IntegerMatrix::from_rows(rows.into_iter().map(|r| r.into_iter().map(BigInt::from).collect()).collect())
            .unwrap()
    }

    #[test]
    fn regulator_trivial_system() {
        let id = RationalMatrix::identity(2);
        let spec = PlantSpec {
            a: RationalMatrix::zeros(2, 2),
            b: id.clone(),
            c: id.clone(),
            s: id.clone(),
            k: RationalMatrix::zeros(2, 2),
            l: RationalMatrix::zeros(2, 2),
            c_xp0: int(1),
            c_vp0: int(1),
        };
        let reg = solve_regulator(&spec).unwrap();
        assert_eq!(reg.gamma, id);
        assert_eq!(reg.v, id);
        assert!(reg.unique);
    }

    #[test]
    fn regulator_ramp_is_exact() {
        let spec = ramp();
        let reg = solve_regulator(&spec).unwrap();
        let (r1, r2) = reg.residuals(&spec);
        assert!(r1.is_zero() && r2.is_zero());
        assert_eq!(reg.gamma, m(vec![vec![int(10), int(-100)], vec![int(0), int(10)]]));
        assert_eq!(reg.v, m(vec![vec![int(15), rat(-155, 2)], vec![int(0), rat(5, 2)]]));
        assert_eq!(
            reg.v_minus_k_gamma(&spec),
            m(vec![vec![int(15), rat(-145, 2)], vec![int(0), rat(5, 2)]])
        );
    }

    #[test]
    fn regulator_zero_output_has_no_solution() {
        let mut spec = ramp();
        spec.c = RationalMatrix::zeros(2, 2);
        assert_eq!(solve_regulator(&spec), Err(DesignError::NoSolution));
    }

    #[test]
    fn regulator_flags_non_unique() {
        // B has two identical columns, so V is only determined up to a null direction.
        let spec = PlantSpec {
            a: m(vec![vec![int(0)]]),
            b: m(vec![vec![int(1), int(1)]]),
            c: m(vec![vec![int(1)]]),
            s: m(vec![vec![int(1)]]),
            k: m(vec![vec![int(0)], vec![int(0)]]),
            l: m(vec![vec![int(0)]]),
            c_xp0: int(1),
            c_vp0: int(1),
        };
        let reg = solve_regulator(&spec).unwrap();
        assert!(!reg.unique);
        let (r1, r2) = reg.residuals(&spec);
        assert!(r1.is_zero() && r2.is_zero());
    }

    #[test]
    fn dimension_errors() {
        let mut spec = ramp();
        spec.a = RationalMatrix::zeros(2, 3);
        assert!(matches!(spec.dims(), Err(DesignError::Dimension(_))));
        let mut spec = ramp();
        spec.l = RationalMatrix::zeros(2, 1);
        assert!(matches!(solve_regulator(&spec), Err(DesignError::Dimension(_))));
    }

    #[test]
    fn integerize_ramp() {
        let spec = ramp();
        let reg = solve_regulator(&spec).unwrap();
        let art = integerize(&spec, &reg, &rat(1, 2), &rat(1, 2), &int(1)).unwrap();
        assert_eq!(art.a_lc, imat(vec![vec![0, -1], vec![0, 1]]));
        assert_eq!(art.b, imat(vec![vec![1, -1], vec![0, 2]]));
        assert_eq!(art.l, imat(vec![vec![0, 5], vec![0, 0]]));
        assert_eq!(art.s_gamma, imat(vec![vec![3, 4], vec![0, 2]]));
        assert_eq!(art.s_over_gamma, BigInt::one());
        assert_eq!(art.k, imat(vec![vec![0, -1], vec![0, 0]]));
        assert_eq!(art.s_s, imat(vec![vec![3, 4], vec![0, 2]]));
        assert_eq!(art.v_kg, imat(vec![vec![30, -145], vec![0, 5]]));
        assert_eq!(art.cayley.c, vec![BigInt::from(-5), BigInt::from(6)]);
        assert_eq!(art.cayley.c_plus_norm(), BigInt::from(12));
        assert!(art.cayley.residual(&art.s_gamma).is_zero());
        assert!(art.stability.waiver);
        assert!((art.stability.rho_a_bk - 0.5).abs() < 1e-9);
        assert!((art.stability.rho_a_lc - 0.5).abs() < 1e-9);
    }

    #[test]
    fn integerize_one_third_fails_on_integrality() {
        let spec = ramp();
        let reg = solve_regulator(&spec).unwrap();
        match integerize(&spec, &reg, &rat(1, 3), &rat(1, 2), &int(1)) {
            Err(DesignError::IntegerizationFailure(entries)) => {
                assert!(entries
                    .iter()
                    .any(|e| e.matrix == "(A-LC)/gamma" && e.value == rat(-3, 2)));
                assert!(entries.iter().any(|e| e.matrix == "(A-LC)/gamma" && e.value == rat(3, 2)));
            }
            other => panic!("expected integerization failure, got {other:?}"),
        }
    }

    #[test]
    fn integerize_margin_violation() {
        // A = 1/2 with zero gains: the floor is 1/2, and γ = 1/4 keeps everything integral.
        let spec = PlantSpec {
            a: m(vec![vec![rat(1, 2)]]),
            b: m(vec![vec![int(1)]]),
            c: m(vec![vec![int(1)]]),
            s: m(vec![vec![int(1)]]),
            k: m(vec![vec![int(0)]]),
            l: m(vec![vec![int(0)]]),
            c_xp0: int(1),
            c_vp0: int(1),
        };
        let reg = solve_regulator(&spec).unwrap();
        let err = integerize(&spec, &reg, &rat(1, 4), &rat(1, 4), &int(1)).unwrap_err();
        assert!(matches!(err, DesignError::StabilityMarginViolation { .. }), "{err:?}");
    }

    #[test]
    fn integerize_rejects_parameters_outside_unit_interval() {
        let spec = ramp();
        let reg = solve_regulator(&spec).unwrap();
        assert!(matches!(
            integerize(&spec, &reg, &int(1), &rat(1, 2), &int(1)),
            Err(DesignError::InvalidParameter(_))
        ));
        assert!(matches!(
            integerize(&spec, &reg, &rat(1, 2), &int(0), &int(1)),
            Err(DesignError::InvalidParameter(_))
        ));
        assert!(matches!(
            integerize(&spec, &reg, &rat(1, 2), &rat(1, 2), &int(0)),
            Err(DesignError::InvalidParameter(_))
        ));
    }

    #[test]
    fn artifacts_round_trip_to_rational_originals() {
        let spec = ramp();
        let reg = solve_regulator(&spec).unwrap();
        let (g, s) = (rat(1, 2), rat(1, 2));
        let art = integerize(&spec, &reg, &g, &s, &int(1)).unwrap();
        assert_eq!(art.a_lc.to_rational().scale(&g), spec.a_minus_lc());
        assert_eq!(art.b.to_rational().scale(&(&g / &s)), spec.b);
        assert_eq!(art.l.to_rational().scale(&(&g / &s)), spec.l);
        assert_eq!(art.s_gamma.to_rational().scale(&g), spec.s);
        assert_eq!(art.s_s.to_rational().scale(&s), spec.s);
        assert_eq!(art.k.to_rational().scale(&s), spec.k);
        assert_eq!(art.v_kg.to_rational().scale(&s), reg.v_minus_k_gamma(&spec));
        let json = serde_json::to_string(&art).unwrap();
        let back: DesignArtifacts = serde_json::from_str(&json).unwrap();
        assert_eq!(back, art);
    }

    #[test]
    fn deadbeat_integerizes() {
        let spec = deadbeat();
        let reg = solve_regulator(&spec).unwrap();
        assert_eq!(reg.gamma, m(vec![vec![int(1)]]));
        assert_eq!(reg.v, m(vec![vec![int(0)]]));
        let art = integerize(&spec, &reg, &rat(1, 2), &rat(1, 2), &int(1)).unwrap();
        assert_eq!(art.cayley.c, vec![BigInt::from(-2)]);
        assert!(!art.stability.waiver);
    }

    fn small_rational() -> impl Strategy<Value = Rational> {
        (-6i64..7, 1i64..4).prop_map(|(n, d)| rat(n, d))
    }

    fn random_system() -> impl Strategy<Value = PlantSpec> {
        (1usize..=4, 1usize..=3, 1usize..=3).prop_flat_map(|(n, w, v)| {
            let mat = move |r: usize, c: usize| {
                proptest::collection::vec(small_rational(), r * c)
                    .prop_map(move |d| RationalMatrix::from_vec(r, c, d).unwrap())
            };
            (mat(n, n), mat(n, w), mat(v, n), mat(v, v)).prop_map(move |(a, b, c, s)| PlantSpec {
                a,
                b,
                c,
                s,
                k: RationalMatrix::zeros(w, n),
                l: RationalMatrix::zeros(n, v),
                c_xp0: int(1),
                c_vp0: int(1),
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn regulator_residuals_vanish_when_solvable(spec in random_system()) {
            match solve_regulator(&spec) {
                Ok(reg) => {
                    let (r1, r2) = reg.residuals(&spec);
                    prop_assert!(r1.is_zero());
                    prop_assert!(r2.is_zero());
                }
                Err(DesignError::NoSolution) => {}
                Err(e) => prop_assert!(false, "unexpected error {e}"),
            }
        }

        #[test]
        fn cayley_residual_is_exactly_zero(
            v in 1usize..=4,
            entries in proptest::collection::vec(-5i64..6, 16),
        ) {
            let s = IntegerMatrix::from_vec(v, v, entries[..v * v].iter().map(|&x| BigInt::from(x)).collect()).unwrap();
            let c = CayleyCoefficients::of(&s);
            prop_assert_eq!(c.c_plus.len(), v + 1);
            prop_assert!(c.residual(&s).is_zero());
        }
    }
}
