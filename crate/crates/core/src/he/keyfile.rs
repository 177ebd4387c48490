use std::path::Path;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::Num;
use serde::{Deserialize, Serialize};

use super::{AdditiveHe, HeError, InsecureMockHe, PaillierHe};

/// Key material as JSON. Integers are lowercase hex strings without prefix.
///
/// Contains secrets in the Paillier case; written only for trace replay.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "lowercase", deny_unknown_fields)]
pub enum KeyFile {
    Mock { q: String, seed: u64 },
    Paillier { p1: String, p2: String },
}

fn to_hex(x: &BigUint) -> String {
    x.to_str_radix(16)
}

fn from_hex(field: &str, s: &str) -> Result<BigUint, HeError> {
    BigUint::from_str_radix(s, 16).map_err(|e| HeError::KeyFile(format!("{field}: {e}")))
}

impl KeyFile {
    pub fn from_mock(he: &InsecureMockHe) -> Self {
        let q = he.modulus().to_biguint().expect("positive modulus");
        KeyFile::Mock {
            q: to_hex(&q),
            seed: he.seed(),
        }
    }

    pub fn from_paillier(he: &PaillierHe) -> Self {
        let (p1, p2) = he.primes();
        KeyFile::Paillier {
            p1: to_hex(p1),
            p2: to_hex(p2),
        }
    }

    pub fn to_mock(&self) -> Result<InsecureMockHe, HeError> {
        match self {
            KeyFile::Mock { q, seed } => {
                InsecureMockHe::keygen(&BigInt::from_biguint(Sign::Plus, from_hex("q", q)?), *seed)
            }
            KeyFile::Paillier { .. } => Err(HeError::KeyFile("expected mock keys, found paillier".into())),
        }
    }

    pub fn to_paillier(&self) -> Result<PaillierHe, HeError> {
        match self {
            KeyFile::Paillier { p1, p2 } => PaillierHe::from_primes(from_hex("p1", p1)?, from_hex("p2", p2)?),
            KeyFile::Mock { .. } => Err(HeError::KeyFile("expected paillier keys, found mock".into())),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("key file serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, HeError> {
        serde_json::from_str(text).map_err(|e| HeError::KeyFile(e.to_string()))
    }

    pub fn write(&self, path: &Path) -> Result<(), HeError> {
        std::fs::write(path, self.to_json()).map_err(|e| HeError::KeyFile(format!("{}: {e}", path.display())))
    }

    pub fn read(path: &Path) -> Result<Self, HeError> {
        let text = std::fs::read_to_string(path).map_err(|e| HeError::KeyFile(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mock_roundtrip() {
        let he = InsecureMockHe::keygen(&BigInt::from(1 << 15), 1).unwrap();
        let kf = KeyFile::from_mock(&he);
        let json = kf.to_json();
        assert!(json.contains("\"backend\": \"mock\""));
        assert!(json.contains("\"8000\""));
        let back = KeyFile::from_json(&json).unwrap().to_mock().unwrap();
        assert_eq!(back, he);
    }

    #[test]
    fn paillier_roundtrip() {
        let he = PaillierHe::keygen(256, 7).unwrap();
        let back = KeyFile::from_json(&KeyFile::from_paillier(&he).to_json())
            .unwrap()
            .to_paillier()
            .unwrap();
        assert_eq!(back, he);
        assert_eq!(back.key_id(), he.key_id());
    }

    #[test]
    fn wrong_backend_and_garbage_rejected() {
        let kf = KeyFile::from_mock(&InsecureMockHe::keygen(&BigInt::from(8), 0).unwrap());
        assert!(kf.to_paillier().is_err());
        assert!(KeyFile::from_json(r#"{"backend":"mock","q":"zz","seed":0}"#)
            .unwrap()
            .to_mock()
            .is_err());
        assert!(KeyFile::from_json(r#"{"backend":"rsa"}"#).is_err());
    }
}
