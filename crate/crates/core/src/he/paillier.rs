use num_bigint::{BigInt, BigUint, RandBigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::{AdditiveHe, Backend, HeError, KeyId};

/// Smallest accepted bit length of `N`. Test-grade only; use 2048+ otherwise.
pub const MIN_PAILLIER_BITS: u64 = 256;

/// Textbook Paillier with `g = N + 1`. The plaintext space is `Z_N`, so `q = N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaillierHe {
    n: BigUint,
    n_sq: BigUint,
    q: BigInt,
    p1: BigUint,
    p2: BigUint,
    lambda: BigUint,
    mu: BigUint,
    id: KeyId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaillierCiphertext {
    key: KeyId,
    value: BigUint,
}

fn random_prime(rng: &mut ChaCha20Rng, bits: u64) -> BigUint {
    loop {
        let mut cand = rng.gen_biguint(bits);
        // Top two bits set so the product has exactly 2*bits bits.
        cand.set_bit(bits - 1, true);
        cand.set_bit(bits - 2, true);
        cand.set_bit(0, true);
        if num_prime::nt_funcs::is_prime(&cand, None).probably() {
            return cand;
        }
    }
}

impl PaillierHe {
    /// Deterministic in `seed`. `bits` is the bit length of `N` and must be even.
    pub fn keygen(bits: u64, seed: u64) -> Result<Self, HeError> {
        if bits < MIN_PAILLIER_BITS || !bits.is_multiple_of(2) {
            return Err(HeError::InvalidBitLength(bits));
        }
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let p1 = random_prime(&mut rng, bits / 2);
        let p2 = loop {
            let c = random_prime(&mut rng, bits / 2);
            if c != p1 {
                break c;
            }
        };
        Self::from_primes(p1, p2)
    }

    pub fn from_primes(p1: BigUint, p2: BigUint) -> Result<Self, HeError> {
        if p1 == p2 {
            return Err(HeError::KeyFile("Paillier primes must be distinct".into()));
        }
        let n = &p1 * &p2;
        let one = BigUint::one();
        let lambda = (&p1 - &one).lcm(&(&p2 - &one));
        let n_sq = &n * &n;
        // With g = N+1, L(g^λ mod N²) = λ mod N.
        let mu = mod_inverse(&(&lambda % &n), &n)
            .ok_or_else(|| HeError::KeyFile("λ is not invertible modulo N".into()))?;
        let id = KeyId::fingerprint(&[b"paillier", &n.to_bytes_be()]);
        Ok(Self {
            q: BigInt::from_biguint(Sign::Plus, n.clone()),
            n,
            n_sq,
            p1,
            p2,
            lambda,
            mu,
            id,
        })
    }

    pub fn n(&self) -> &BigUint {
        &self.n
    }

    pub fn primes(&self) -> (&BigUint, &BigUint) {
        (&self.p1, &self.p2)
    }

    fn random_unit(&self, rng: &mut (impl RngCore + ?Sized)) -> BigUint {
        loop {
            let r = sample_below(rng, &self.n);
            if !r.is_zero() && r.gcd(&self.n).is_one() {
                return r;
            }
        }
    }
}

/// Uniform sample in `[0, bound)` by rejection from the RNG's byte stream.
fn sample_below<R: RngCore + ?Sized>(rng: &mut R, bound: &BigUint) -> BigUint {
    let bits = bound.bits();
    let bytes = bits.div_ceil(8) as usize;
    let excess = (bytes as u64) * 8 - bits;
    let mut buf = vec![0u8; bytes];
    loop {
        rng.fill_bytes(&mut buf);
        buf[0] &= 0xffu8 >> excess;
        let x = BigUint::from_bytes_be(&buf);
        if &x < bound {
            return x;
        }
    }
}

fn mod_inverse(a: &BigUint, m: &BigUint) -> Option<BigUint> {
    let a = BigInt::from_biguint(Sign::Plus, a.clone());
    let m = BigInt::from_biguint(Sign::Plus, m.clone());
    let e = a.extended_gcd(&m);
    if !e.gcd.is_one() {
        return None;
    }
    e.x.mod_floor(&m).to_biguint()
}

impl AdditiveHe for PaillierHe {
    type Ciphertext = PaillierCiphertext;

    fn backend(&self) -> Backend {
        Backend::Paillier
    }

    fn modulus(&self) -> &BigInt {
        &self.q
    }

    fn key_id(&self) -> KeyId {
        self.id
    }

    fn key_of(c: &PaillierCiphertext) -> KeyId {
        c.key
    }

    /// `(1 + mN) · r^N mod N²` with a fresh unit `r`.
    fn encrypt_residue<R: RngCore + ?Sized>(&self, m: &BigInt, rng: &mut R) -> PaillierCiphertext {
        let m = m.to_biguint().expect("residue in [0, q)");
        let r = self.random_unit(rng);
        let gm = (BigUint::one() + m * &self.n) % &self.n_sq;
        let value = gm * r.modpow(&self.n, &self.n_sq) % &self.n_sq;
        PaillierCiphertext { key: self.id, value }
    }

    fn decrypt_residue(&self, c: &PaillierCiphertext) -> Result<BigInt, HeError> {
        if c.value.is_zero() || c.value >= self.n_sq {
            return Err(HeError::Tampered);
        }
        let u = c.value.modpow(&self.lambda, &self.n_sq);
        let l = (u - BigUint::one()) / &self.n;
        let m = l * &self.mu % &self.n;
        Ok(BigInt::from_biguint(Sign::Plus, m))
    }

    fn add_ciphertexts(&self, a: &PaillierCiphertext, b: &PaillierCiphertext) -> PaillierCiphertext {
        PaillierCiphertext {
            key: self.id,
            value: &a.value * &b.value % &self.n_sq,
        }
    }

    fn scale_ciphertext(&self, c: &PaillierCiphertext, k: &BigInt) -> PaillierCiphertext {
        let k = k.to_biguint().expect("scalar in [0, q)");
        PaillierCiphertext {
            key: self.id,
            value: c.value.modpow(&k, &self.n_sq),
        }
    }
}
