use std::collections::VecDeque;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::RngCore;

use super::{InitialConditions, Scheme};
use crate::design::{DesignArtifacts, PlantSpec};
use crate::exactmath::{centered_lift_vec, floor, mod_floor, to_rational_vec, vector, IntegerMatrix, Rational};
use crate::he::{AdditiveHe, CipherVector, HeError};
use crate::quantizer::quantize_vector;

/// Plant and exosystem, advanced exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Plant {
    pub x_p: Vec<Rational>,
    pub v_p: Vec<Rational>,
}

impl Plant {
    pub fn new(initial: &InitialConditions) -> Self {
        Self {
            x_p: initial.x_p0.clone(),
            v_p: initial.v_p0.clone(),
        }
    }

    pub fn output(&self, spec: &PlantSpec) -> Vec<Rational> {
        spec.c.mul_vec(&self.x_p)
    }

    pub fn tracking_error(&self, spec: &PlantSpec) -> Rational {
        vector::inf_norm(&vector::sub(&self.output(spec), &self.v_p))
    }

    pub fn advance(&mut self, spec: &PlantSpec, u_a: &[Rational]) {
        self.x_p = vector::add(&spec.a.mul_vec(&self.x_p), &spec.b.mul_vec(u_a));
        self.v_p = spec.s.mul_vec(&self.v_p);
    }
}

/// `Q(y/l(k))`, the sensor's plaintext before reduction and encryption.
pub fn sensor_measure(spec: &PlantSpec, plant: &Plant, l: &Rational) -> Vec<BigInt> {
    quantize_vector(&vector::scale(&l.recip(), &plant.output(spec)))
}

fn reduce(x: &[BigInt], q: &BigInt) -> Vec<BigInt> {
    x.iter().map(|e| mod_floor(e, q)).collect()
}

/// Holds an exact replica of `ṽ(k)` so it can quantize `(S/s)(ṽ_p − ṽ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceProvider {
    pub(super) v_tilde: Vec<BigInt>,
}

impl ReferenceProvider {
    pub fn new(v_tilde0: &[BigInt]) -> Self {
        Self {
            v_tilde: v_tilde0.to_vec(),
        }
    }

    /// `Q((S/s)ṽ_p − (S/s)ṽ)` with `ṽ_p = s·v_p/l(k)`; advances the replica.
    pub fn innovation(&mut self, art: &DesignArtifacts, v_p: &[Rational], l: &Rational) -> Vec<BigInt> {
        let s_s = art.s_s.to_rational();
        let vp_tilde = vector::scale(&(&art.s / l), v_p);
        let arg = vector::sub(&s_s.mul_vec(&vp_tilde), &s_s.mul_vec(&to_rational_vec(&self.v_tilde)));
        let qv = quantize_vector(&arg);
        self.v_tilde = vector::add(
            &art.s_gamma.mul_vec(&self.v_tilde),
            &vector::scale(&art.s_over_gamma, &qv),
        );
        qv
    }
}

/// The controller on ciphertexts. Holds only public, pre-reduced matrices.
#[derive(Debug, Clone)]
pub struct EncryptedController<C> {
    a_lc: IntegerMatrix,
    b: IntegerMatrix,
    l: IntegerMatrix,
    s_gamma: IntegerMatrix,
    s_over_gamma: IntegerMatrix,
    k: IntegerMatrix,
    v_kg: IntegerMatrix,
    /// `C_v ⊗ I_w`, reduced.
    cayley: IntegerMatrix,
    pub(super) x: CipherVector<C>,
    pub(super) v: CipherVector<C>,
    /// Scheme B: `ū_c(k−1), …, ū_c(k−v)`.
    history: VecDeque<CipherVector<C>>,
}

impl<C: Clone + std::fmt::Debug + PartialEq + Eq> EncryptedController<C> {
    pub fn new<H, R>(
        he: &H,
        art: &DesignArtifacts,
        x0: &[BigInt],
        v0: &[BigInt],
        scheme: Scheme,
        rng: &mut R,
    ) -> Result<Self, HeError>
    where
        H: AdditiveHe<Ciphertext = C>,
        R: RngCore + ?Sized,
    {
        let q = he.modulus();
        let w = art.k.rows();
        let v = art.s_gamma.rows();
        let c_row = IntegerMatrix::from_vec(1, v, art.cayley.c.clone()).expect("row");
        let history = if scheme == Scheme::B {
            (0..v)
                .map(|_| he.encrypt(&vec![BigInt::zero(); w], rng))
                .collect::<Result<_, _>>()?
        } else {
            VecDeque::new()
        };
        Ok(Self {
            a_lc: art.a_lc.reduce_mod(q),
            b: art.b.reduce_mod(q),
            l: art.l.reduce_mod(q),
            s_gamma: art.s_gamma.reduce_mod(q),
            s_over_gamma: IntegerMatrix::identity(v).scale(&art.s_over_gamma).reduce_mod(q),
            k: art.k.reduce_mod(q),
            v_kg: art.v_kg.reduce_mod(q),
            cayley: c_row.kron(&IntegerMatrix::identity(w)).reduce_mod(q),
            x: he.encrypt(&reduce(x0, q), rng)?,
            v: he.encrypt(&reduce(v0, q), rng)?,
            history,
        })
    }

    /// `ū_c(k) = K̄·x̃_c ⊕ V̄·ṽ_c`.
    pub fn controller_output_scheme_a<H: AdditiveHe<Ciphertext = C>>(
        &self,
        he: &H,
    ) -> Result<CipherVector<C>, HeError> {
        he.cipher_add(&he.plain_mul(&self.k, &self.x)?, &he.plain_mul(&self.v_kg, &self.v)?)
    }

    /// `m_c(k) = ū_c(k) ⊕ (C_v ⊗ I)·Ū_c(k−1)`; pushes `ū_c(k)` into the history.
    pub fn controller_output_scheme_b<H: AdditiveHe<Ciphertext = C>>(
        &mut self,
        he: &H,
        u_c: &CipherVector<C>,
    ) -> Result<CipherVector<C>, HeError> {
        let stacked = CipherVector::concat(self.history.iter());
        let m = he.cipher_add(u_c, &he.plain_mul(&self.cayley, &stacked)?)?;
        self.history.push_front(u_c.clone());
        self.history.pop_back();
        Ok(m)
    }

    /// `x̃_c ← Ā·x̃_c ⊕ B̄·ū_c ⊕ L̄·y_c`, `ṽ_c ← S̄·ṽ_c ⊕ (s/γ)·r_c`.
    pub fn update<H: AdditiveHe<Ciphertext = C>>(
        &mut self,
        he: &H,
        u_c: &CipherVector<C>,
        y_c: &CipherVector<C>,
        r_c: &CipherVector<C>,
    ) -> Result<(), HeError> {
        let x = he.cipher_add(
            &he.cipher_add(&he.plain_mul(&self.a_lc, &self.x)?, &he.plain_mul(&self.b, u_c)?)?,
            &he.plain_mul(&self.l, y_c)?,
        )?;
        let v = he.cipher_add(
            &he.plain_mul(&self.s_gamma, &self.v)?,
            &he.plain_mul(&self.s_over_gamma, r_c)?,
        )?;
        self.x = x;
        self.v = v;
        Ok(())
    }
}

/// `ū_a(k) = dec − ⌊(dec + C_vŪ_a(k−1) + q/2)/q⌋·q` and `u_a(k) = l(k)ū_a(k)`.
pub fn actuator_restore_a(
    dec: &[BigInt],
    buf: &VecDeque<Vec<BigInt>>,
    c: &[BigInt],
    q: &BigInt,
    l: &Rational,
) -> (Vec<BigInt>, Vec<Rational>) {
    let t = super::oracle::cayley_combination(dec, buf, c);
    let two = BigInt::from(2);
    let u_bar: Vec<BigInt> = dec
        .iter()
        .zip(&t)
        .map(|(d, ti)| {
            let wrap = num_integer::Integer::div_floor(&(&two * ti + q), &(&two * q));
            d - wrap * q
        })
        .collect();
    let u = vector::scale(l, &to_rational_vec(&u_bar));
    (u_bar, u)
}

/// `m_a(k) = lift(dec)` and `u_a(k) = l(k)m_a(k) − Σ_j c_{v−j}γ^j u_a(k−j)`.
pub fn actuator_restore_b(
    dec: &[BigInt],
    buf: &VecDeque<Vec<Rational>>,
    c: &[BigInt],
    gamma: &Rational,
    q: &BigInt,
    l: &Rational,
) -> (Vec<BigInt>, Vec<Rational>) {
    let m = centered_lift_vec(dec, q);
    let mut u = vector::scale(l, &to_rational_vec(&m));
    let mut gj = Rational::one();
    for (cj, uj) in c.iter().zip(buf) {
        gj *= gamma;
        let coef = Rational::from_integer(cj.clone()) * &gj;
        u = vector::sub(&u, &vector::scale(&coef, uj));
    }
    (m, u)
}

/// Constant-reference restoration from the previous input only:
/// `u_a(k) = l(k)(dec − ⌊(dec − u(k−1)/l(k) + q/2)/q⌋·q)`.
pub fn actuator_restore_naive(
    dec: &[BigInt],
    u_prev: &[Rational],
    q: &BigInt,
    l: &Rational,
) -> (Vec<BigInt>, Vec<Rational>) {
    let qr = Rational::from_integer(q.clone());
    let half = &qr / Rational::from_integer(BigInt::from(2));
    let u_bar: Vec<BigInt> = dec
        .iter()
        .zip(u_prev)
        .map(|(d, up)| {
            let arg = (Rational::from_integer(d.clone()) - up / l + &half) / &qr;
            d - floor(&arg) * q
        })
        .collect();
    let u = vector::scale(l, &to_rational_vec(&u_bar));
    (u_bar, u)
}

/// Actuator memory per scheme; buffers hold exactly `v` entries.
#[derive(Debug, Clone, PartialEq)]
pub enum Actuator {
    A { buf: VecDeque<Vec<BigInt>> },
    B { buf: VecDeque<Vec<Rational>> },
    Naive { u_prev: Vec<Rational> },
}

pub struct Restored {
    pub u_a: Vec<Rational>,
    /// `ū_a(k)` for A and naive, `m_a(k)` for B.
    pub internal: Vec<BigInt>,
}

impl Actuator {
    pub fn new(scheme: Scheme, w: usize, v: usize) -> Self {
        match scheme {
            Scheme::A => Actuator::A {
                buf: (0..v).map(|_| vec![BigInt::zero(); w]).collect(),
            },
            Scheme::B => Actuator::B {
                buf: (0..v).map(|_| vec![Rational::zero(); w]).collect(),
            },
            Scheme::Naive => Actuator::Naive {
                u_prev: vec![Rational::zero(); w],
            },
        }
    }

    /// `ū(k) + C_vŪ_a(k−1)` from the actuator's own memory (scheme A only).
    pub fn combination_argument(&self, u_bar: &[BigInt], c: &[BigInt]) -> Option<Vec<BigInt>> {
        match self {
            Actuator::A { buf } => Some(super::oracle::cayley_combination(u_bar, buf, c)),
            _ => None,
        }
    }

    pub fn restore(&mut self, dec: &[BigInt], art: &DesignArtifacts, q: &BigInt, l: &Rational) -> Restored {
        let c = &art.cayley.c;
        match self {
            Actuator::A { buf } => {
                let (u_bar, u_a) = actuator_restore_a(dec, buf, c, q, l);
                buf.push_front(u_bar.clone());
                buf.pop_back();
                Restored { u_a, internal: u_bar }
            }
            Actuator::B { buf } => {
                let (m, u_a) = actuator_restore_b(dec, buf, c, &art.gamma, q, l);
                buf.push_front(u_a.clone());
                buf.pop_back();
                Restored { u_a, internal: m }
            }
            Actuator::Naive { u_prev } => {
                let (u_bar, u_a) = actuator_restore_naive(dec, u_prev, q, l);
                *u_prev = u_a.clone();
                Restored { u_a, internal: u_bar }
            }
        }
    }
}
