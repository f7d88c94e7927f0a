//! Exact rational helpers.
//!
//! Every clock value, delay and cost in this crate is a [`Rational`]
//! (an arbitrary-precision fraction kept in canonical form). There is no
//! floating point on any decision path; `to_decimal` exists only for
//! human-facing output.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = num_rational::BigRational;

/// Error raised when a `"p/q"` string cannot be read back.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational {0:?}")]
pub struct RationalParseError(pub String);

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// `base^exp` as an exact rational.
pub fn pow(base: i64, exp: u32) -> Rational {
    Rational::from_integer(num_traits::pow(BigInt::from(base), exp as usize))
}

/// `1 / base^exp`.
pub fn inv_pow(base: i64, exp: u32) -> Rational {
    pow(base, exp).recip()
}

/// Renders as `numerator/denominator`, always with an explicit denominator.
pub fn fmt(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

pub fn parse(s: &str) -> Result<Rational, RationalParseError> {
    let err = || RationalParseError(s.to_string());
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| err())?;
    let d: BigInt = d.parse().map_err(|_| err())?;
    if d.is_zero() {
        return Err(err());
    }
    Ok(Rational::new(n, d))
}

/// Approximate decimal rendering, marked as such by callers.
pub fn to_decimal(q: &Rational, digits: usize) -> String {
    let neg = q.is_negative();
    let q = q.abs();
    let (whole, rem) = q.numer().div_rem(q.denom());
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    out.push_str(&whole.to_string());
    if digits > 0 {
        out.push('.');
        let mut rem = rem;
        for _ in 0..digits {
            rem *= 10;
            let (digit, r) = rem.div_rem(q.denom());
            out.push_str(&digit.to_string());
            rem = r;
        }
    }
    out
}

/// Smallest integer `>= q`.
pub fn ceil_int(q: &Rational) -> BigInt {
    q.ceil().to_integer()
}

pub fn to_f64_lossy(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Serde adapter storing a rational as a `"p/q"` string.
pub mod serde_str {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Display wrapper for `p/q` formatting inside `format!`.
pub struct Frac<'a>(pub &'a Rational);

impl fmt::Display for Frac<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}
