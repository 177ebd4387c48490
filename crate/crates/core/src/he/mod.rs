//! Additively homomorphic encryption over `Z_q`.
//!
//! The loop only relies on three laws:
//!
//! 1. `Dec(Enc(x)) = x` for `x ∈ Z_q^n`,
//! 2. `Dec(c1 ⊕ c2) = Dec(c1) + Dec(c2) mod q`,
//! 3. `Dec(M · c) = M Dec(c) mod q` for a plaintext `M ∈ Z_q^{m×n}`.
//!
//! [`AdditiveHe`] exposes the scalar primitives a backend must supply; the
//! vector-level operations are provided methods that enforce ranges, dimensions
//! and key identity. Two backends exist: [`PaillierHe`] (textbook Paillier, where
//! `q` is the public modulus `N`) and [`InsecureMockHe`], which accepts any
//! `q ≥ 2` and exists only so small moduli can be tested exactly and fast.

mod keyfile;
mod mock;
mod paillier;

use std::fmt;

use num_bigint::BigInt;
use num_traits::Signed;
use rand::RngCore;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::exactmath::IntegerMatrix;

pub use keyfile::KeyFile;
pub use mock::{InsecureMockHe, MockCiphertext};
pub use paillier::{PaillierCiphertext, PaillierHe, MIN_PAILLIER_BITS};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HeError {
    #[error("plaintext coordinate {index} = {value} is outside [0, q)")]
    OutOfRange { index: usize, value: BigInt },
    #[error("matrix entry ({row},{col}) = {value} is not reduced into [0, q)")]
    UnreducedEntry { row: usize, col: usize, value: BigInt },
    #[error("ciphertext under key {got} used with key {expected}")]
    KeyMismatch { expected: KeyId, got: KeyId },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("modulus must be at least 2, got {0}")]
    ModulusTooSmall(BigInt),
    #[error("Paillier modulus needs an even bit length of at least {MIN_PAILLIER_BITS}, got {0}")]
    InvalidBitLength(u64),
    #[error("ciphertext failed the integrity check")]
    Tampered,
    #[error("key file: {0}")]
    KeyFile(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Mock,
    Paillier,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Mock => "mock",
            Backend::Paillier => "paillier",
        })
    }
}

impl std::str::FromStr for Backend {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "mock" => Ok(Backend::Mock),
            "paillier" => Ok(Backend::Paillier),
            _ => Err(format!("unknown backend {s:?}; expected mock or paillier")),
        }
    }
}

/// Short fingerprint of a key set, carried by every ciphertext.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KeyId(pub u64);

impl KeyId {
    pub(crate) fn fingerprint(parts: &[&[u8]]) -> Self {
        let mut h = Sha256::new();
        for p in parts {
            h.update((p.len() as u64).to_be_bytes());
            h.update(p);
        }
        let digest = h.finalize();
        let mut head = [0u8; 8];
        head.copy_from_slice(&digest[..8]);
        KeyId(u64::from_be_bytes(head))
    }
}

impl fmt::Display for KeyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

/// One ciphertext per plaintext coordinate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CipherVector<C> {
    items: Vec<C>,
}

impl<C> CipherVector<C> {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, C> {
        self.items.iter()
    }

    /// Stacks vectors top to bottom.
    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a CipherVector<C>>) -> Self
    where
        C: Clone + 'a,
    {
        Self {
            items: parts
                .into_iter()
                .flat_map(|p| p.items.iter().cloned())
                .collect(),
        }
    }
}

/// Scalar primitives of an additively homomorphic scheme with plaintext space `Z_q`.
///
/// Implementations may assume their inputs are in range and under their own key;
/// the provided vector methods check both. Encryption takes an explicit RNG so
/// that independent streams can be used from different threads.
pub trait AdditiveHe {
    type Ciphertext: Clone + fmt::Debug + PartialEq + Eq;

    fn backend(&self) -> Backend;
    fn modulus(&self) -> &BigInt;
    fn key_id(&self) -> KeyId;
    fn key_of(c: &Self::Ciphertext) -> KeyId;

    fn encrypt_residue<R: RngCore + ?Sized>(&self, m: &BigInt, rng: &mut R) -> Self::Ciphertext;
    fn decrypt_residue(&self, c: &Self::Ciphertext) -> Result<BigInt, HeError>;
    /// `⊕` on single ciphertexts.
    fn add_ciphertexts(&self, a: &Self::Ciphertext, b: &Self::Ciphertext) -> Self::Ciphertext;
    /// Multiplication of a ciphertext by a plaintext scalar in `[0, q)`.
    fn scale_ciphertext(&self, c: &Self::Ciphertext, k: &BigInt) -> Self::Ciphertext;

    fn check_key(&self, c: &Self::Ciphertext) -> Result<(), HeError> {
        let got = Self::key_of(c);
        if got != self.key_id() {
            return Err(HeError::KeyMismatch {
                expected: self.key_id(),
                got,
            });
        }
        Ok(())
    }

    fn encrypt<R: RngCore + ?Sized>(
        &self,
        m: &[BigInt],
        rng: &mut R,
    ) -> Result<CipherVector<Self::Ciphertext>, HeError> {
        let q = self.modulus();
        let items = m
            .iter()
            .enumerate()
            .map(|(index, x)| {
                if x.is_negative() || x >= q {
                    return Err(HeError::OutOfRange {
                        index,
                        value: x.clone(),
                    });
                }
                Ok(self.encrypt_residue(x, rng))
            })
            .collect::<Result<_, _>>()?;
        Ok(CipherVector { items })
    }

    fn decrypt(&self, c: &CipherVector<Self::Ciphertext>) -> Result<Vec<BigInt>, HeError> {
        c.iter()
            .map(|ct| {
                self.check_key(ct)?;
                self.decrypt_residue(ct)
            })
            .collect()
    }

    fn cipher_add(
        &self,
        a: &CipherVector<Self::Ciphertext>,
        b: &CipherVector<Self::Ciphertext>,
    ) -> Result<CipherVector<Self::Ciphertext>, HeError> {
        if a.len() != b.len() {
            return Err(HeError::Dimension {
                expected: a.len(),
                got: b.len(),
            });
        }
        let items = a
            .iter()
            .zip(b.iter())
            .map(|(x, y)| {
                self.check_key(x)?;
                self.check_key(y)?;
                Ok(self.add_ciphertexts(x, y))
            })
            .collect::<Result<_, HeError>>()?;
        Ok(CipherVector { items })
    }

    /// `M · c` for a plaintext matrix with entries already reduced into `[0, q)`.
    fn plain_mul(
        &self,
        m: &IntegerMatrix,
        c: &CipherVector<Self::Ciphertext>,
    ) -> Result<CipherVector<Self::Ciphertext>, HeError> {
        if m.cols() != c.len() || m.cols() == 0 {
            return Err(HeError::Dimension {
                expected: m.cols(),
                got: c.len(),
            });
        }
        let q = self.modulus();
        if let Some((row, col, value)) = m.indexed().find(|(_, _, x)| x.is_negative() || *x >= q) {
            return Err(HeError::UnreducedEntry {
                row,
                col,
                value: value.clone(),
            });
        }
        for ct in c.iter() {
            self.check_key(ct)?;
        }
        let items = (0..m.rows())
            .map(|i| {
                let mut terms = m
                    .row(i)
                    .iter()
                    .zip(c.iter())
                    .map(|(k, ct)| self.scale_ciphertext(ct, k));
                let first = terms.next().expect("at least one column");
                terms.fold(first, |acc, t| self.add_ciphertexts(&acc, &t))
            })
            .collect();
        Ok(CipherVector { items })
    }
}
