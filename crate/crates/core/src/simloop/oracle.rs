use std::collections::VecDeque;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{InitialConditions, Plant, ReferenceProvider, SimError};
use crate::design::{DesignArtifacts, PlantSpec, RegulatorSolution};
use crate::exactmath::{
    solve_linear_exact, to_rational_vec, vector, IntegerMatrix, Rational, RationalMatrix,
};
use crate::quantizer::quantize_vector;

/// Plaintext, unbounded-integer replica of the controller together with the
/// error signals `p̄, ē_x, ē_v, z` it is analysed with.
#[derive(Debug, Clone)]
pub struct Oracle {
    pub(super) x_tilde: Vec<BigInt>,
    pub(super) v_tilde: Vec<BigInt>,
    /// `ū(k−1), …, ū(k−v)`; zero before time 0.
    u_hist: VecDeque<Vec<BigInt>>,
    /// `z(k−1), …, z(k−v)`; `None` when a negative-time value is undefined.
    z_hist: VecDeque<Option<Vec<Rational>>>,
    u_prev: Vec<Rational>,
    v_minus_kg: RationalMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleDiagnostics {
    pub k: usize,
    pub u_bar: Vec<BigInt>,
    pub u: Vec<Rational>,
    /// `ū(k) + C_vŪ(k−1)`, the value scheme B transmits.
    pub m: Vec<BigInt>,
    pub figure4_norm: BigInt,
    pub p_bar: Vec<Rational>,
    pub e_x: Vec<Rational>,
    pub e_v: Vec<Rational>,
    pub e_y_q: Vec<Rational>,
    pub z: Vec<Rational>,
    /// `‖[p̄; ē_x]‖∞`
    pub pe_inf: Rational,
    /// `ū(k) + C_vŪ(k−1) = C_{v+1}Z(k)`; `None` when `Z(k)` reaches undefined history.
    pub history_identity: Option<bool>,
    /// `‖ē_v‖∞ ≤ 1/(2γ)`; only asserted for `k ≥ 1`.
    pub e_v_within: Option<bool>,
    /// `‖(u(k) − u(k−1))/l(k)‖∞`
    pub naive_jump: Rational,
    pub x_tilde: Vec<BigInt>,
    pub v_tilde: Vec<BigInt>,
}

fn inverse(m: &RationalMatrix) -> Option<RationalMatrix> {
    let n = m.rows();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let e: Vec<Rational> = (0..n).map(|i| if i == j { Rational::one() } else { Rational::zero() }).collect();
        cols.push(solve_linear_exact(m, &e).ok()?);
    }
    let data = (0..n).flat_map(|i| cols.iter().map(move |c| c[i].clone())).collect();
    Some(RationalMatrix::from_vec(n, n, data).expect("square"))
}

fn int_mul(m: &IntegerMatrix, x: &[BigInt]) -> Vec<BigInt> {
    m.mul_vec(x)
}

/// `ū(k) + C_vŪ(k−1)` from a history ordered newest first.
pub(crate) fn cayley_combination(u: &[BigInt], hist: &VecDeque<Vec<BigInt>>, c: &[BigInt]) -> Vec<BigInt> {
    let mut out = u.to_vec();
    for (cj, uj) in c.iter().zip(hist) {
        for (o, x) in out.iter_mut().zip(uj) {
            *o += cj * x;
        }
    }
    out
}

impl Oracle {
    pub fn new(
        spec: &PlantSpec,
        reg: &RegulatorSolution,
        art: &DesignArtifacts,
        initial: &InitialConditions,
    ) -> Result<Self, SimError> {
        let (x_tilde, v_tilde) = initial.scaled_estimates(art)?;
        let w = spec.b.cols();
        let v = spec.s.rows();

        // Extending v̄_p backwards through S̄⁻¹ keeps ū(j) = 0 consistent with
        // z(j) = −V v̄_p(j) for j < 0.
        let s_gamma = art.s_gamma.to_rational();
        let z_hist = match inverse(&s_gamma) {
            Some(inv) => {
                let mut vp = vector::scale(&art.zoom.l0.recip(), &initial.v_p0);
                (0..v)
                    .map(|_| {
                        vp = inv.mul_vec(&vp);
                        Some(vector::scale(&-Rational::one(), &reg.v.mul_vec(&vp)))
                    })
                    .collect()
            }
            None => (0..v).map(|_| None).collect(),
        };

        Ok(Self {
            x_tilde,
            v_tilde,
            u_hist: (0..v).map(|_| vec![BigInt::zero(); w]).collect(),
            z_hist,
            u_prev: vec![Rational::zero(); w],
            v_minus_kg: reg.v_minus_k_gamma(spec),
        })
    }

    /// `ū(k) = K̄x̃ + V̄ṽ` without advancing.
    pub fn control(&self, art: &DesignArtifacts) -> Vec<BigInt> {
        vector::add(&int_mul(&art.k, &self.x_tilde), &int_mul(&art.v_kg, &self.v_tilde))
    }

    pub fn u_history(&self) -> &VecDeque<Vec<BigInt>> {
        &self.u_hist
    }

    /// Evaluates every diagnostic at step `k`, then advances on the quantized inputs.
    #[allow(clippy::too_many_arguments)]
    pub fn step(
        &mut self,
        spec: &PlantSpec,
        reg: &RegulatorSolution,
        art: &DesignArtifacts,
        k: usize,
        x_p: &[Rational],
        v_p: &[Rational],
        qy: &[BigInt],
        qv: &[BigInt],
    ) -> OracleDiagnostics {
        let l = art.zoom.at(k);
        let inv_l = l.recip();
        let inv_s = art.s.recip();
        let u_bar = self.control(art);
        let u = vector::scale(&l, &to_rational_vec(&u_bar));

        let xp_bar = vector::scale(&inv_l, x_p);
        let vp_bar = vector::scale(&inv_l, v_p);
        let x_bar = vector::scale(&inv_s, &to_rational_vec(&self.x_tilde));
        let v_bar = vector::scale(&inv_s, &to_rational_vec(&self.v_tilde));
        let p_bar = vector::sub(&xp_bar, &reg.gamma.mul_vec(&vp_bar));
        let e_x = vector::sub(&xp_bar, &x_bar);
        let e_v = vector::sub(&vp_bar, &v_bar);
        let y_bar = spec.c.mul_vec(&xp_bar);
        let e_y_q = vector::sub(&y_bar, &to_rational_vec(qy));
        let z = vector::sub(
            &vector::sub(&spec.k.mul_vec(&p_bar), &spec.k.mul_vec(&e_x)),
            &self.v_minus_kg.mul_vec(&e_v),
        );
        debug_assert_eq!(
            to_rational_vec(&u_bar),
            vector::add(&reg.v.mul_vec(&vp_bar), &z),
            "ū must equal V v̄_p + z"
        );

        let c = &art.cayley.c;
        let m = cayley_combination(&u_bar, &self.u_hist, c);
        let figure4_norm = vector::inf_norm(&m);
        let history_identity = self.z_hist.iter().all(Option::is_some).then(|| {
            let mut rhs = z.clone();
            for (cj, zj) in c.iter().zip(&self.z_hist) {
                let zj = zj.as_ref().expect("checked");
                rhs = vector::add(&rhs, &vector::scale(&Rational::from_integer(cj.clone()), zj));
            }
            rhs == to_rational_vec(&m)
        });
        let half_over_gamma = (Rational::from_integer(BigInt::from(2)) * &art.gamma).recip();
        let e_v_within = (k >= 1).then(|| vector::inf_norm(&e_v) <= half_over_gamma);
        let naive_jump = vector::inf_norm(&vector::scale(&inv_l, &vector::sub(&u, &self.u_prev)));
        let pe_inf = vector::inf_norm(&p_bar).max(vector::inf_norm(&e_x));

        let diag = OracleDiagnostics {
            k,
            u_bar: u_bar.clone(),
            u: u.clone(),
            m,
            figure4_norm,
            p_bar,
            e_x,
            e_v,
            e_y_q,
            z: z.clone(),
            pe_inf,
            history_identity,
            e_v_within,
            naive_jump,
            x_tilde: self.x_tilde.clone(),
            v_tilde: self.v_tilde.clone(),
        };

        self.x_tilde = vector::add(
            &vector::add(&int_mul(&art.a_lc, &self.x_tilde), &int_mul(&art.b, &u_bar)),
            &int_mul(&art.l, qy),
        );
        self.v_tilde = vector::add(
            &int_mul(&art.s_gamma, &self.v_tilde),
            &vector::scale(&art.s_over_gamma, qv),
        );
        self.u_hist.push_front(u_bar);
        self.u_hist.pop_back();
        self.z_hist.push_front(Some(z));
        self.z_hist.pop_back();
        self.u_prev = u;
        diag
    }
}

/// Runs the loop without encryption, driving the plant with the oracle's `u(k)`.
///
/// Returns one diagnostic per step for `k = 0..=horizon`.
pub fn run_plaintext(
    spec: &PlantSpec,
    reg: &RegulatorSolution,
    art: &DesignArtifacts,
    initial: &InitialConditions,
    horizon: usize,
) -> Result<Vec<OracleDiagnostics>, SimError> {
    initial.check_dims(spec)?;
    let mut plant = Plant::new(initial);
    let mut oracle = Oracle::new(spec, reg, art, initial)?;
    let mut provider = ReferenceProvider::new(&oracle.v_tilde);
    let mut out = Vec::with_capacity(horizon + 1);
    for k in 0..=horizon {
        let l = art.zoom.at(k);
        let qy = quantize_vector(&vector::scale(&l.recip(), &plant.output(spec)));
        let qv = provider.innovation(art, &plant.v_p, &l);
        let d = oracle.step(spec, reg, art, k, &plant.x_p, &plant.v_p, &qy, &qv);
        plant.advance(spec, &d.u);
        out.push(d);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{integerize, solve_regulator};
    use crate::exactmath::{int, rat};

    fn ramp_setup() -> (PlantSpec, RegulatorSolution, DesignArtifacts) {
        let spec = crate::design::fixtures::ramp();
        let reg = solve_regulator(&spec).unwrap();
        let art = integerize(&spec, &reg, &rat(1, 2), &rat(1, 2), &int(1)).unwrap();
        (spec, reg, art)
    }

    fn default_ics() -> InitialConditions {
        InitialConditions {
            x_p0: vec![int(1), int(1)],
            v_p0: vec![int(1), int(0)],
            x_hat0: vec![int(0), int(0)],
            v_hat0: vec![int(0), int(0)],
        }
    }

    #[test]
    fn zero_everything_gives_zero_diagnostics() {
        let (spec, reg, art) = ramp_setup();
        let zero = vec![int(0), int(0)];
        let ic = InitialConditions {
            x_p0: zero.clone(),
            v_p0: zero.clone(),
            x_hat0: zero.clone(),
            v_hat0: zero.clone(),
        };
        let run = run_plaintext(&spec, &reg, &art, &ic, 5).unwrap();
        for d in &run {
            assert!(d.u_bar.iter().all(Zero::is_zero));
            assert!(d.z.iter().all(Zero::is_zero));
            assert!(d.pe_inf.is_zero());
            assert_eq!(d.figure4_norm, BigInt::zero());
            assert_eq!(d.history_identity, Some(true));
        }
    }

    #[test]
    fn ramp_identities_hold_every_step() {
        let (spec, reg, art) = ramp_setup();
        let run = run_plaintext(&spec, &reg, &art, &default_ics(), 60).unwrap();
        assert_eq!(run.len(), 61);
        assert!(run.iter().all(|d| d.history_identity == Some(true)));
        assert!(run[1..].iter().all(|d| d.e_v_within == Some(true)));
        let max = run.iter().map(|d| d.figure4_norm.clone()).max().unwrap();
        assert_eq!(max, BigInt::from(180));
        let sup = run.iter().map(|d| d.pe_inf.clone()).max().unwrap();
        assert_eq!(sup, int(30));
    }

    #[test]
    fn cayley_combination_matches_hand_value() {
        let hist: VecDeque<Vec<BigInt>> = vec![vec![BigInt::from(2)], vec![BigInt::from(3)]].into();
        let c = vec![BigInt::from(-5), BigInt::from(6)];
        // 7 − 5·2 + 6·3 = 15
        assert_eq!(cayley_combination(&[BigInt::from(7)], &hist, &c), vec![BigInt::from(15)]);
    }
}
