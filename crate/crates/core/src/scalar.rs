//! Coefficient rings.
//!
//! Every algebraic object in the crate is generic over a [`Scalar`]. The
//! exact paths use [`Rational`], [`TPoly`](crate::TPoly) and
//! [`ExpPoly`](crate::ExpPoly); the numeric paths use [`Complex64`] or `f64`.
//! Picking the ring is a compile-time decision, so an exact computation can
//! never silently fall back to floating point.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::Value;

use crate::error::{Error, Result};

/// Arbitrary-precision rational number.
pub type Rational = BigRational;

/// A commutative ring with unit that contains the rationals we need
/// (operator coefficients are integers, `1/N²` corrections are rationals).
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// The ring element `num / den`. `den` must be nonzero.
    fn from_ratio(num: i64, den: i64) -> Self;

    fn from_int(n: i64) -> Self {
        Self::from_ratio(n, 1)
    }
}

impl Scalar for Rational {
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
}

impl Scalar for f64 {
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
}

impl Scalar for Complex64 {
    fn from_ratio(num: i64, den: i64) -> Self {
        Complex64::new(num as f64 / den as f64, 0.0)
    }
}

/// Lossy embedding into double-precision complex numbers.
pub trait ToComplex {
    fn to_complex(&self) -> Complex64;
}

impl ToComplex for Rational {
    fn to_complex(&self) -> Complex64 {
        Complex64::new(rational_to_f64(self), 0.0)
    }
}

impl ToComplex for f64 {
    fn to_complex(&self) -> Complex64 {
        Complex64::new(*self, 0.0)
    }
}

impl ToComplex for Complex64 {
    fn to_complex(&self) -> Complex64 {
        *self
    }
}

/// Nearest double to a rational; exact whenever the value is representable.
pub fn rational_to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Parses `"p/q"`, `"p"` or `"-p/q"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational numerator in {s:?}")))?;
    let den: BigInt = den
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational denominator in {s:?}")))?;
    if den.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(BigRational::new(num, den))
}

/// Converts a finite double to the exactly equal rational.
pub fn rational_from_f64(x: f64) -> Result<Rational> {
    BigRational::from_float(x).ok_or_else(|| Error::Parse(format!("{x} is not finite")))
}

/// Coefficients that have a canonical JSON form.
pub trait JsonCoeff: Sized {
    fn to_json(&self) -> Value;
    fn from_json(v: &Value) -> Result<Self>;
}

impl JsonCoeff for Rational {
    fn to_json(&self) -> Value {
        Value::String(self.to_string())
    }

    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::String(s) => parse_rational(s),
            Value::Number(n) if n.is_i64() => Ok(Rational::from_int(n.as_i64().unwrap())),
            other => Err(Error::Parse(format!("expected rational string, got {other}"))),
        }
    }
}

impl JsonCoeff for Complex64 {
    fn to_json(&self) -> Value {
        serde_json::json!([self.re, self.im])
    }

    fn from_json(v: &Value) -> Result<Self> {
        let bad = || Error::Parse(format!("expected [re, im], got {v}"));
        match v {
            Value::Array(parts) if parts.len() == 2 => {
                let re = parts[0].as_f64().ok_or_else(bad)?;
                let im = parts[1].as_f64().ok_or_else(bad)?;
                Ok(Complex64::new(re, im))
            }
            Value::Number(n) => Ok(Complex64::new(n.as_f64().ok_or_else(bad)?, 0.0)),
            // Exact inputs are accepted wherever a float is expected.
            Value::String(s) => Ok(parse_rational(s)?.to_complex()),
            _ => Err(bad()),
        }
    }
}

impl JsonCoeff for f64 {
    fn to_json(&self) -> Value {
        serde_json::json!(self)
    }

    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::Number(n) => n
                .as_f64()
                .ok_or_else(|| Error::Parse(format!("bad number {n}"))),
            Value::String(s) => Ok(rational_to_f64(&parse_rational(s)?)),
            other => Err(Error::Parse(format!("expected number, got {other}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_parse_forms() {
        assert_eq!(parse_rational("3/6").unwrap(), Rational::from_ratio(1, 2));
        assert_eq!(parse_rational("-4").unwrap(), Rational::from_int(-4));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn rational_to_float_is_exact_when_representable() {
        for (n, d) in [(1, 2), (-3, 8), (5, 1), (1, 1024)] {
            let q = Rational::from_ratio(n, d);
            assert_eq!(rational_to_f64(&q), n as f64 / d as f64);
            assert_eq!(rational_from_f64(rational_to_f64(&q)).unwrap(), q);
        }
    }

    #[test]
    fn json_round_trip() {
        let q = Rational::from_ratio(-8, 3);
        assert_eq!(q.to_json(), Value::String("-8/3".into()));
        assert_eq!(Rational::from_json(&q.to_json()).unwrap(), q);
        let c = Complex64::new(0.5, -2.0);
        assert_eq!(Complex64::from_json(&c.to_json()).unwrap(), c);
    }
}
