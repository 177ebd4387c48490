use num_bigint::{BigInt, BigUint, Sign};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use super::{AdditiveHe, Backend, HeError, KeyId};
use crate::exactmath::mod_floor;

/// INSECURE. Residues are stored in the clear up to a keyed XOR mask.
///
/// The mask and the integrity tag only catch accidental mixing or corruption of
/// ciphertexts; they provide no confidentiality. Use for tests and for small `q`
/// that Paillier cannot offer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InsecureMockHe {
    q: BigInt,
    seed: u64,
    mask: BigUint,
    tag_key: [u8; 32],
    id: KeyId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MockCiphertext {
    key: KeyId,
    masked: BigUint,
    tag: u64,
}

impl InsecureMockHe {
    pub fn keygen(q: &BigInt, seed: u64) -> Result<Self, HeError> {
        if q < &BigInt::from(2) {
            return Err(HeError::ModulusTooSmall(q.clone()));
        }
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let bytes = q.bits().div_ceil(8) as usize;
        let mut mask_bytes = vec![0u8; bytes];
        rng.fill_bytes(&mut mask_bytes);
        let mut tag_key = [0u8; 32];
        rng.fill_bytes(&mut tag_key);
        let q_bytes = q.to_signed_bytes_be();
        let id = KeyId::fingerprint(&[b"mock", &q_bytes, &seed.to_be_bytes()]);
        Ok(Self {
            q: q.clone(),
            seed,
            mask: BigUint::from_bytes_be(&mask_bytes),
            tag_key,
            id,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn tag(&self, masked: &BigUint) -> u64 {
        let mut h = Sha256::new();
        h.update(self.tag_key);
        h.update(masked.to_bytes_be());
        let d = h.finalize();
        let mut head = [0u8; 8];
        head.copy_from_slice(&d[..8]);
        u64::from_be_bytes(head)
    }

    fn seal(&self, residue: &BigInt) -> MockCiphertext {
        let (_, mag) = residue.clone().into_parts();
        let masked = mag ^ &self.mask;
        MockCiphertext {
            key: self.id,
            tag: self.tag(&masked),
            masked,
        }
    }

    fn open(&self, c: &MockCiphertext) -> Result<BigInt, HeError> {
        if self.tag(&c.masked) != c.tag {
            return Err(HeError::Tampered);
        }
        let value = BigInt::from_biguint(Sign::Plus, &c.masked ^ &self.mask);
        if value >= self.q {
            return Err(HeError::Tampered);
        }
        Ok(value)
    }

    fn poisoned(&self) -> MockCiphertext {
        let mut c = self.seal(&BigInt::from(0));
        c.tag = !c.tag;
        c
    }

    #[cfg(test)]
    pub(crate) fn corrupt(c: &mut MockCiphertext) {
        c.masked ^= BigUint::from(1u8);
    }
}

impl AdditiveHe for InsecureMockHe {
    type Ciphertext = MockCiphertext;

    fn backend(&self) -> Backend {
        Backend::Mock
    }

    fn modulus(&self) -> &BigInt {
        &self.q
    }

    fn key_id(&self) -> KeyId {
        self.id
    }

    fn key_of(c: &MockCiphertext) -> KeyId {
        c.key
    }

    /// Deterministic; the RNG is not consumed.
    fn encrypt_residue<R: RngCore + ?Sized>(&self, m: &BigInt, _rng: &mut R) -> MockCiphertext {
        self.seal(m)
    }

    fn decrypt_residue(&self, c: &MockCiphertext) -> Result<BigInt, HeError> {
        self.open(c)
    }

    /// A tampered operand yields a ciphertext that fails to decrypt.
    fn add_ciphertexts(&self, a: &MockCiphertext, b: &MockCiphertext) -> MockCiphertext {
        match (self.open(a), self.open(b)) {
            (Ok(x), Ok(y)) => self.seal(&mod_floor(&(x + y), &self.q)),
            _ => self.poisoned(),
        }
    }

    fn scale_ciphertext(&self, c: &MockCiphertext, k: &BigInt) -> MockCiphertext {
        match self.open(c) {
            Ok(x) => self.seal(&mod_floor(&(x * k), &self.q)),
            Err(_) => self.poisoned(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keygen_examples() {
        let he = InsecureMockHe::keygen(&BigInt::from(1 << 15), 1).unwrap();
        assert_eq!(he.modulus(), &BigInt::from(32768));
        let he = InsecureMockHe::keygen(&BigInt::from(2), 0).unwrap();
        assert_eq!(he.modulus(), &BigInt::from(2));
        assert!(matches!(
            InsecureMockHe::keygen(&BigInt::from(1), 0),
            Err(HeError::ModulusTooSmall(_))
        ));
    }

    #[test]
    fn deterministic_given_seed() {
        let q = BigInt::from(1 << 10);
        let a = InsecureMockHe::keygen(&q, 5).unwrap();
        let b = InsecureMockHe::keygen(&q, 5).unwrap();
        assert_eq!(a, b);
        let mut r = ChaCha20Rng::seed_from_u64(0);
        assert_eq!(
            a.encrypt(&[BigInt::from(3)], &mut r).unwrap(),
            b.encrypt(&[BigInt::from(3)], &mut r).unwrap()
        );
        assert_ne!(a.key_id(), InsecureMockHe::keygen(&q, 6).unwrap().key_id());
    }

    #[test]
    fn corruption_is_detected() {
        let he = InsecureMockHe::keygen(&BigInt::from(1 << 10), 5).unwrap();
        let mut c = he.encrypt_residue(&BigInt::from(9), &mut ChaCha20Rng::seed_from_u64(0));
        InsecureMockHe::corrupt(&mut c);
        assert_eq!(he.decrypt_residue(&c), Err(HeError::Tampered));
        let clean = he.encrypt_residue(&BigInt::from(1), &mut ChaCha20Rng::seed_from_u64(0));
        let sum = he.add_ciphertexts(&c, &clean);
        assert_eq!(he.decrypt_residue(&sum), Err(HeError::Tampered));
    }
}
