//! Exact rational and big-integer linear algebra.
//!
//! Every computation on the control path goes through this module so that the
//! encrypted loop, the plaintext oracle and the synthesis step agree bit for bit.
//! The only floating-point outputs are the spectral-radius estimate and the
//! 2-norm upper bounds in [`norms`], which are used for validation and for the
//! analytic modulus bound, never for state updates.

mod charpoly;
mod matrix;
pub mod norms;
mod solve;

use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

pub use charpoly::{char_poly_coeffs, CharPoly};
pub use matrix::{vector, IntegerMatrix, Matrix, RationalMatrix};
pub use norms::{power_sup_norm, spectral_radius, PowerNormSummary};
pub use solve::{solve_linear_exact, LinearSolveError};

/// Exact rational number, always in lowest terms with a positive denominator.
pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MathError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("cannot parse {0:?} as an exact rational")]
    Parse(String),
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"p/q"`, an integer, or a finite decimal (`"0.1"`, `"-2.5e-3"`) exactly.
/// The Unicode minus sign is accepted in place of `-`.
pub fn parse_rational(text: &str) -> Result<Rational, MathError> {
    let err = || MathError::Parse(text.to_string());
    let s = text.trim().replace('\u{2212}', "-");
    if s.is_empty() {
        return Err(err());
    }
    if let Some((num, den)) = s.split_once('/') {
        let n = BigInt::from_str(num.trim()).map_err(|_| err())?;
        let d = BigInt::from_str(den.trim()).map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(n, d));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (
            &s[..pos],
            s[pos + 1..].parse::<i32>().map_err(|_| err())?,
        ),
        None => (s.as_str(), 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty()
        || !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())
    {
        return Err(err());
    }
    let all_digits = format!("{whole}{frac}");
    let mut value = Rational::from_integer(BigInt::from_str(&all_digits).map_err(|_| err())?);
    let scale = exponent - frac.len() as i32;
    let ten = Rational::from_integer(BigInt::from(10));
    value *= num_traits::pow::Pow::pow(&ten, scale);
    Ok(if negative { -value } else { value })
}

/// Renders `p/q`, or just `p` for integers.
pub fn format_rational(x: &Rational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn rational_to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(if x.is_negative() {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    })
}

/// `g mod q` with the result in `[0, q)` (floor convention).
pub fn mod_floor(g: &BigInt, q: &BigInt) -> BigInt {
    g.mod_floor(q)
}

/// Maps an integer to its representative in `[-q/2, q/2)`:
/// `m - floor((m + q/2) / q) * q`.
///
/// For odd `q` the half-modulus is the rational `q/2`; the floor is taken
/// exactly as `floor((2m + q) / (2q))`.
pub fn centered_lift(m: &BigInt, q: &BigInt) -> BigInt {
    debug_assert!(q >= &BigInt::from(2), "modulus must be at least 2");
    let two = BigInt::from(2);
    let wraps = (&two * m + q).div_floor(&(&two * q));
    m - wraps * q
}

pub fn centered_lift_vec(m: &[BigInt], q: &BigInt) -> Vec<BigInt> {
    m.iter().map(|x| centered_lift(x, q)).collect()
}

pub fn floor(x: &Rational) -> BigInt {
    x.floor().to_integer()
}

pub fn to_rational_vec(v: &[BigInt]) -> Vec<Rational> {
    v.iter().cloned().map(Rational::from_integer).collect()
}

/// Returns the vector as integers when every entry is integral.
pub fn to_integer_vec(v: &[Rational]) -> Option<Vec<BigInt>> {
    v.iter()
        .map(|x| x.is_integer().then(|| x.to_integer()))
        .collect()
}

/// Serde adapters that keep rationals exact in JSON.
///
/// Values serialize as `"p/q"` (or integer) strings. On input both strings and
/// JSON numbers are accepted; numbers are read from their literal text, so
/// `0.1` becomes exactly `1/10`.
pub mod serde_rational {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use serde_json::Value;

    use super::{format_rational, parse_rational, Rational, RationalMatrix};

    pub(crate) fn from_value<E: serde::de::Error>(v: &Value) -> Result<Rational, E> {
        match v {
            Value::String(s) => parse_rational(s).map_err(E::custom),
            Value::Number(n) => parse_rational(&n.to_string()).map_err(E::custom),
            other => Err(E::custom(format!(
                "expected a rational string or number, got {other}"
            ))),
        }
    }

    pub fn serialize<S: Serializer>(x: &Rational, s: S) -> Result<S::Ok, S::Error> {
        format_rational(x).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        from_value(&Value::deserialize(d)?)
    }

    pub mod vec {
        use super::*;

        pub fn serialize<S: Serializer>(x: &[Rational], s: S) -> Result<S::Ok, S::Error> {
            x.iter().map(format_rational).collect::<Vec<_>>().serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
            Vec::<Value>::deserialize(d)?
                .iter()
                .map(from_value)
                .collect()
        }
    }

    pub mod matrix {
        use super::*;

        pub fn serialize<S: Serializer>(m: &RationalMatrix, s: S) -> Result<S::Ok, S::Error> {
            m.to_rows()
                .iter()
                .map(|r| r.iter().map(format_rational).collect::<Vec<_>>())
                .collect::<Vec<_>>()
                .serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<RationalMatrix, D::Error> {
            let rows = Vec::<Vec<Value>>::deserialize(d)?
                .iter()
                .map(|r| r.iter().map(from_value).collect::<Result<Vec<_>, _>>())
                .collect::<Result<Vec<_>, _>>()?;
            RationalMatrix::from_rows(rows).map_err(D::Error::custom)
        }
    }
}

/// Serde adapters for big integers as decimal strings.
pub mod serde_bigint {
    use std::str::FromStr;

    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use serde_json::Value;

    pub(crate) fn from_value<E: serde::de::Error>(v: &Value) -> Result<BigInt, E> {
        let text = match v {
            Value::String(s) => s.clone(),
            Value::Number(n) => n.to_string(),
            other => return Err(E::custom(format!("expected an integer, got {other}"))),
        };
        BigInt::from_str(text.trim()).map_err(|_| E::custom(format!("invalid integer {text:?}")))
    }

    pub fn serialize<S: Serializer>(x: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        x.to_string().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        from_value(&Value::deserialize(d)?)
    }

    pub mod vec {
        use super::*;

        pub fn serialize<S: Serializer>(x: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
            x.iter().map(ToString::to_string).collect::<Vec<_>>().serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
            Vec::<Value>::deserialize(d)?.iter().map(from_value).collect()
        }
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(x: &Option<BigInt>, s: S) -> Result<S::Ok, S::Error> {
            x.as_ref().map(ToString::to_string).serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigInt>, D::Error> {
            match Option::<Value>::deserialize(d)? {
                None | Some(Value::Null) => Ok(None),
                Some(v) => from_value::<D::Error>(&v).map(Some),
            }
        }
    }
}

/// Serde adapter for integer matrices as nested arrays of decimal strings.
pub mod serde_integer_matrix {
    use std::str::FromStr;

    use num_bigint::BigInt;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::IntegerMatrix;

    pub fn serialize<S: Serializer>(m: &IntegerMatrix, s: S) -> Result<S::Ok, S::Error> {
        m.to_rows()
            .iter()
            .map(|r| r.iter().map(ToString::to_string).collect::<Vec<_>>())
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<IntegerMatrix, D::Error> {
        let rows = Vec::<Vec<String>>::deserialize(d)?
            .iter()
            .map(|r| {
                r.iter()
                    .map(|x| BigInt::from_str(x).map_err(D::Error::custom))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        IntegerMatrix::from_rows(rows).map_err(D::Error::custom)
    }
}
