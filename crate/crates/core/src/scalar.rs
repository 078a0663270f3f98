//! Distance values.
//!
//! Continuous spaces measure distances in `f64`; finite spaces use exact
//! rationals so that strict inequalities can be decided without slack.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use std::fmt::Debug;
use std::str::FromStr;

/// Relative slack applied to non-strict floating-point inequalities.
pub const FLOAT_SLACK: f64 = 1e-12;

pub trait Scalar: Clone + Debug + PartialOrd + Signed + Send + Sync + 'static {
    /// Exact arithmetic: comparisons need no rounding slack.
    const EXACT: bool;

    fn from_f64(value: f64) -> Option<Self>;

    fn to_f64(&self) -> f64;

    /// Parses a decimal (`0.125`, `1e-3`) or, for exact scalars, a fraction
    /// (`1/8`). Exact scalars keep decimals exact.
    fn parse(text: &str) -> Option<Self>;

    /// `self > 0`. Unlike `Signed::is_positive`, false for `+0.0`.
    fn is_strictly_positive(&self) -> bool {
        *self > Self::zero()
    }

    /// `self < 0`. Unlike `Signed::is_negative`, false for `-0.0`.
    fn is_strictly_negative(&self) -> bool {
        *self < Self::zero()
    }

    fn half(&self) -> Self {
        self.clone() / (Self::one() + Self::one())
    }

    /// `lhs ≤ rhs` is broken beyond rounding slack.
    fn exceeds(lhs: &Self, rhs: &Self) -> bool;

    /// Shortest text form that parses back to the same value.
    fn repr(&self) -> String;

    fn serialize_scalar<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error>;
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_f64(value: f64) -> Option<Self> {
        value.is_finite().then_some(value)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn parse(text: &str) -> Option<Self> {
        text.trim().parse::<f64>().ok().filter(|v| v.is_finite())
    }

    fn exceeds(lhs: &Self, rhs: &Self) -> bool {
        lhs - rhs > FLOAT_SLACK * lhs.abs().max(rhs.abs())
    }

    fn repr(&self) -> String {
        serde_json::to_string(self).unwrap_or_else(|_| self.to_string())
    }

    fn serialize_scalar<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_f64(*self)
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_f64(value: f64) -> Option<Self> {
        <BigRational as FromPrimitive>::from_f64(value)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn parse(text: &str) -> Option<Self> {
        parse_rational(text)
    }

    fn exceeds(lhs: &Self, rhs: &Self) -> bool {
        lhs > rhs
    }

    fn repr(&self) -> String {
        if self.denom().is_one() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }

    fn serialize_scalar<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.repr())
    }
}

/// Exact parse of `p/q`, integers and decimal/scientific notation.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num = BigInt::from_str(num.trim()).ok()?;
        let den = BigInt::from_str(den.trim()).ok()?;
        if den.is_zero() {
            return None;
        }
        return Some(BigRational::new(num, den));
    }
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(at) => (&text[..at], text[at + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(BigInt::from_str(&digits).ok()?);
    let scale = exponent - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    let factor = num_traits::pow(ten, scale.unsigned_abs() as usize);
    if scale >= 0 {
        value *= factor;
    } else {
        value /= factor;
    }
    Some(if negative { -value } else { value })
}

/// Serialize adapter for scalar-valued fields.
pub(crate) struct AsScalar<'a, T>(pub &'a T);

impl<T: Scalar> Serialize for AsScalar<'_, T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.0.serialize_scalar(serializer)
    }
}

pub(crate) fn ser<T: Scalar, S: Serializer>(value: &T, serializer: S) -> Result<S::Ok, S::Error> {
    value.serialize_scalar(serializer)
}

pub(crate) fn ser_opt<T: Scalar, S: Serializer>(value: &Option<T>, serializer: S) -> Result<S::Ok, S::Error> {
    match value {
        Some(v) => serializer.serialize_some(&AsScalar(v)),
        None => serializer.serialize_none(),
    }
}

pub(crate) fn ser_vec<T: Scalar, S: Serializer>(values: &[T], serializer: S) -> Result<S::Ok, S::Error> {
    serializer.collect_seq(values.iter().map(AsScalar))
}
