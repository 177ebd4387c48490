//! Closed-loop simulation of the encrypted tracking controller.
//!
//! Parties are plain state machines; [`LoopState::step`] passes messages between
//! them in a fixed order each step:
//!
//! 1. the sensor sends `Enc(Q(y/l(k)) mod q)`,
//! 2. the reference provider sends `Enc(Q((S/s)ṽ_p − (S/s)ṽ) mod q)`,
//! 3. the controller returns `ū_c(k)` (scheme A and naive) or `m_c(k)` (scheme B)
//!    and updates its encrypted state,
//! 4. the actuator decrypts and restores `u_a(k)`,
//! 5. the oracle replays the same quantized inputs in unbounded integers,
//! 6. plant and exosystem advance on `u_a(k)`.
//!
//! Control values before time 0 are taken as zero by controller, actuator and
//! oracle alike, so the history-based identities hold from `k = 0`.
//!
//! Everything on the loop path is exact; the only randomness is the encryption
//! stream, seeded from the configuration.

mod oracle;
mod parties;
mod trace;

use num_bigint::BigInt;
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::design::{DesignArtifacts, PlantSpec, RegulatorSolution};
use crate::exactmath::{mod_floor, serde_rational, to_integer_vec, vector, Rational};
use crate::he::{AdditiveHe, Backend, HeError};

pub use oracle::{run_plaintext, Oracle, OracleDiagnostics};
pub use parties::{
    actuator_restore_a, actuator_restore_b, actuator_restore_naive, sensor_measure, Actuator,
    EncryptedController, Plant, ReferenceProvider, Restored,
};
pub use trace::{read_trace_csv, trace_to_csv, verify_trace, write_trace_csv, CsvRow, TRACE_COLUMNS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("initial estimate {which} scaled by s/l(0) is not an integer vector")]
    NonIntegerInitialState { which: &'static str },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error(transparent)]
    He(#[from] HeError),
    #[error("trace: {0}")]
    Trace(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    A,
    B,
    Naive,
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scheme::A => "a",
            Scheme::B => "b",
            Scheme::Naive => "naive",
        })
    }
}

impl std::str::FromStr for Scheme {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "a" | "A" => Ok(Scheme::A),
            "b" | "B" => Ok(Scheme::B),
            "naive" => Ok(Scheme::Naive),
            _ => Err(format!("unknown scheme {s:?}; expected a, b or naive")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InitialConditions {
    #[serde(with = "serde_rational::vec")]
    pub x_p0: Vec<Rational>,
    #[serde(with = "serde_rational::vec")]
    pub v_p0: Vec<Rational>,
    #[serde(with = "serde_rational::vec")]
    pub x_hat0: Vec<Rational>,
    #[serde(with = "serde_rational::vec")]
    pub v_hat0: Vec<Rational>,
}

impl InitialConditions {
    pub fn check_dims(&self, spec: &PlantSpec) -> Result<(), SimError> {
        let n = spec.a.rows();
        let v = spec.s.rows();
        for (name, x, len) in [
            ("x_p(0)", &self.x_p0, n),
            ("v_p(0)", &self.v_p0, v),
            ("xhat(0)", &self.x_hat0, n),
            ("vhat(0)", &self.v_hat0, v),
        ] {
            if x.len() != len {
                return Err(SimError::Dimension(format!("{name} has length {}, expected {len}", x.len())));
            }
        }
        Ok(())
    }

    /// `x̃(0) = s·x̂(0)/l(0)` and `ṽ(0) = s·v̂(0)/l(0)`.
    pub fn scaled_estimates(&self, art: &DesignArtifacts) -> Result<(Vec<BigInt>, Vec<BigInt>), SimError> {
        let c = &art.s / &art.zoom.l0;
        let x = to_integer_vec(&vector::scale(&c, &self.x_hat0))
            .ok_or(SimError::NonIntegerInitialState { which: "xhat(0)" })?;
        let v = to_integer_vec(&vector::scale(&c, &self.v_hat0))
            .ok_or(SimError::NonIntegerInitialState { which: "vhat(0)" })?;
        Ok((x, v))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoopConfig {
    pub spec: PlantSpec,
    pub reg: RegulatorSolution,
    pub artifacts: DesignArtifacts,
    pub scheme: Scheme,
    /// Steps `k = 0..=horizon` are simulated.
    pub horizon: usize,
    pub initial: InitialConditions,
    /// Seed of the encryption randomness stream.
    pub seed: u64,
}

/// One row per step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub k: usize,
    #[serde(with = "serde_rational")]
    pub l_k: Rational,
    /// `‖y_p(k) − v_p(k)‖∞`
    #[serde(with = "serde_rational")]
    pub y_err_inf: Rational,
    /// `u_a(k) = u(k)` exactly.
    pub restoration_exact: bool,
    /// `‖ū(k) + C_vŪ_a(k−1)‖∞`
    #[serde(with = "crate::exactmath::serde_bigint")]
    pub figure4_norm: BigInt,
    /// `‖ū_a(k)‖∞` (A, naive) or `‖m_a(k)‖∞` (B).
    #[serde(with = "crate::exactmath::serde_bigint")]
    pub internal_state_inf: BigInt,
    pub overflow_detected: bool,
    #[serde(with = "serde_rational::vec")]
    pub u_a: Vec<Rational>,
    #[serde(with = "serde_rational::vec")]
    pub u: Vec<Rational>,
    /// Scheme B: `m_a(k) = m(k)`.
    pub m_exact: Option<bool>,
    pub history_identity: Option<bool>,
    pub e_v_within: Option<bool>,
    /// Decrypted controller state equals the oracle's mod `q`, and the provider
    /// replica matches the encrypted `ṽ`.
    pub controller_consistent: bool,
    /// `Dec(x̃_c(k))` followed by `Dec(ṽ_c(k))`.
    #[serde(with = "crate::exactmath::serde_bigint::vec")]
    pub controller_state: Vec<BigInt>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub scheme: Scheme,
    pub backend: Backend,
    #[serde(with = "crate::exactmath::serde_bigint")]
    pub q: BigInt,
    pub horizon: usize,
    pub steps: usize,
    pub all_exact: bool,
    pub first_failure: Option<usize>,
    pub first_overflow: Option<usize>,
    #[serde(with = "crate::exactmath::serde_bigint")]
    pub max_figure4_norm: BigInt,
    #[serde(with = "crate::exactmath::serde_bigint")]
    pub max_internal_state: BigInt,
    #[serde(with = "serde_rational")]
    pub initial_y_err: Rational,
    #[serde(with = "serde_rational")]
    pub final_y_err: Rational,
    pub final_y_err_f64: f64,
    pub history_identity_all: bool,
    pub e_v_bound_all: bool,
    pub controller_consistent_all: bool,
    /// `max_figure4_norm` stays below `q/2`.
    pub combination_below_half_q: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
    pub summary: RunSummary,
}

/// All mutable state of a running loop.
pub struct LoopState<'a, H: AdditiveHe> {
    cfg: &'a LoopConfig,
    he: &'a H,
    rng: ChaCha20Rng,
    plant: Plant,
    provider: ReferenceProvider,
    controller: EncryptedController<H::Ciphertext>,
    actuator: Actuator,
    oracle: Oracle,
    next_k: usize,
}

/// Builds every party from the configuration and encrypts the initial controller state.
pub fn init_loop<'a, H: AdditiveHe>(cfg: &'a LoopConfig, he: &'a H) -> Result<LoopState<'a, H>, SimError> {
    cfg.spec.dims().map_err(|e| SimError::Dimension(e.to_string()))?;
    cfg.initial.check_dims(&cfg.spec)?;
    let art = &cfg.artifacts;
    let (x0, v0) = cfg.initial.scaled_estimates(art)?;
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    // Keep encryption randomness apart from any key-generation stream on the same seed.
    rng.set_stream(1);
    let controller = EncryptedController::new(he, art, &x0, &v0, cfg.scheme, &mut rng)?;
    Ok(LoopState {
        cfg,
        he,
        rng,
        plant: Plant::new(&cfg.initial),
        provider: ReferenceProvider::new(&v0),
        controller,
        actuator: Actuator::new(cfg.scheme, cfg.spec.b.cols(), cfg.spec.s.rows()),
        oracle: Oracle::new(&cfg.spec, &cfg.reg, art, &cfg.initial)?,
        next_k: 0,
    })
}

impl<'a, H: AdditiveHe> LoopState<'a, H> {
    pub fn plant(&self) -> &Plant {
        &self.plant
    }

    /// Runs one step. Restoration failures are recorded, never raised.
    pub fn step(&mut self) -> Result<TraceRecord, SimError> {
        let k = self.next_k;
        let cfg = self.cfg;
        let (spec, art, he) = (&cfg.spec, &cfg.artifacts, self.he);
        let q = he.modulus().clone();
        let l = art.zoom.at(k);
        let y_err_inf = self.plant.tracking_error(spec);

        let dec_x = he.decrypt(&self.controller.x)?;
        let dec_v = he.decrypt(&self.controller.v)?;
        let reduce = |x: &[BigInt]| x.iter().map(|e| mod_floor(e, &q)).collect::<Vec<_>>();
        let controller_consistent = dec_x == reduce(&self.oracle.x_tilde)
            && dec_v == reduce(&self.oracle.v_tilde)
            && dec_v == reduce(&self.provider.v_tilde);
        let controller_state: Vec<BigInt> = dec_x.into_iter().chain(dec_v).collect();

        let qy = sensor_measure(spec, &self.plant, &l);
        let y_c = he.encrypt(&reduce(&qy), &mut self.rng)?;
        let qv = self.provider.innovation(art, &self.plant.v_p, &l);
        let r_c = he.encrypt(&reduce(&qv), &mut self.rng)?;

        let u_c = self.controller.controller_output_scheme_a(he)?;
        let out_c = match cfg.scheme {
            Scheme::B => self.controller.controller_output_scheme_b(he, &u_c)?,
            Scheme::A | Scheme::Naive => u_c.clone(),
        };
        self.controller.update(he, &u_c, &y_c, &r_c)?;

        let dec = he.decrypt(&out_c)?;
        let oracle_u_bar = self.oracle.control(art);
        let combination_arg = self.actuator.combination_argument(&oracle_u_bar, &art.cayley.c);
        let restored = self.actuator.restore(&dec, art, &q, &l);
        let d = self.oracle.step(spec, &cfg.reg, art, k, &self.plant.x_p, &self.plant.v_p, &qy, &qv);

        let restoration_exact = restored.u_a == d.u;
        let figure4_norm = match combination_arg {
            Some(arg) => vector::inf_norm(&arg),
            None => d.figure4_norm.clone(),
        };
        let m_exact = (cfg.scheme == Scheme::B).then(|| restored.internal == d.m);
        let overflow_detected = cfg.scheme == Scheme::Naive
            && (!restoration_exact || d.naive_jump >= Rational::new(q.clone(), BigInt::from(2)));

        self.plant.advance(spec, &restored.u_a);
        self.next_k += 1;
        Ok(TraceRecord {
            k,
            l_k: l,
            y_err_inf,
            restoration_exact,
            figure4_norm,
            internal_state_inf: vector::inf_norm(&restored.internal),
            overflow_detected,
            u_a: restored.u_a,
            u: d.u,
            m_exact,
            history_identity: d.history_identity,
            e_v_within: d.e_v_within,
            controller_consistent,
            controller_state,
        })
    }
}

pub fn summarize(cfg: &LoopConfig, backend: Backend, q: &BigInt, records: &[TraceRecord]) -> RunSummary {
    let max = |f: fn(&TraceRecord) -> &BigInt| records.iter().map(f).max().cloned().unwrap_or_else(BigInt::zero);
    let max_figure4_norm = max(|r| &r.figure4_norm);
    let initial_y_err = records.first().map(|r| r.y_err_inf.clone()).unwrap_or_else(Rational::zero);
    let final_y_err = records.last().map(|r| r.y_err_inf.clone()).unwrap_or_else(Rational::zero);
    RunSummary {
        scheme: cfg.scheme,
        backend,
        q: q.clone(),
        horizon: cfg.horizon,
        steps: records.len(),
        all_exact: records.iter().all(|r| r.restoration_exact),
        first_failure: records.iter().find(|r| !r.restoration_exact).map(|r| r.k),
        first_overflow: records.iter().find(|r| r.overflow_detected).map(|r| r.k),
        combination_below_half_q: BigInt::from(2) * &max_figure4_norm < *q,
        max_figure4_norm,
        max_internal_state: max(|r| &r.internal_state_inf),
        final_y_err_f64: crate::exactmath::rational_to_f64(&final_y_err),
        initial_y_err,
        final_y_err,
        history_identity_all: records.iter().all(|r| r.history_identity != Some(false)),
        e_v_bound_all: records.iter().all(|r| r.e_v_within != Some(false)),
        controller_consistent_all: records.iter().all(|r| r.controller_consistent),
    }
}

/// Simulates `k = 0..=horizon` under the given encryption backend.
pub fn run_closed_loop<H: AdditiveHe>(cfg: &LoopConfig, he: &H) -> Result<Trace, SimError> {
    let mut state = init_loop(cfg, he)?;
    let records = (0..=cfg.horizon).map(|_| state.step()).collect::<Result<Vec<_>, _>>()?;
    let summary = summarize(cfg, he.backend(), he.modulus(), &records);
    Ok(Trace { records, summary })
}
