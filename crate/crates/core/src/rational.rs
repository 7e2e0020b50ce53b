//! Exact probabilities and weights.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Exact rational number used for every probability, weight and reward.
pub type Prob = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid rational literal `{0}`")]
pub struct RationalParseError(pub String);

pub fn int(n: i64) -> Prob {
    Prob::from_integer(BigInt::from(n))
}

pub fn ratio(num: i64, den: i64) -> Prob {
    Prob::new(BigInt::from(num), BigInt::from(den))
}

pub fn zero() -> Prob {
    Prob::zero()
}

pub fn one() -> Prob {
    Prob::one()
}

/// Parses `3`, `4/5`, `-1/2`, `0.25` or `1e-3` exactly.
pub fn parse_rational(text: &str) -> Result<Prob, RationalParseError> {
    let err = || RationalParseError(text.to_string());
    let t = text.trim();
    if t.is_empty() {
        return Err(err());
    }
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| err())?;
        let d: BigInt = d.trim().parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(Prob::new(n, d));
    }
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| err())?),
        None => (t, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(err());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let all: String = format!("{whole}{frac}");
    let mut value = Prob::from_integer(all.parse::<BigInt>().map_err(|_| err())?);
    let scale = exponent - frac.len() as i32;
    let ten = Prob::from_integer(BigInt::from(10));
    if scale >= 0 {
        value *= num_traits::pow(ten, scale as usize);
    } else {
        value /= num_traits::pow(ten, (-scale) as usize);
    }
    Ok(if negative { -value } else { value })
}

/// Canonical text form: `n` for integers, `n/d` otherwise.
pub fn format_rational(p: &Prob) -> String {
    if p.is_integer() {
        p.numer().to_string()
    } else {
        format!("{}/{}", p.numer(), p.denom())
    }
}

pub fn to_f64(p: &Prob) -> f64 {
    p.to_f64().unwrap_or_else(|| {
        if p.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

pub fn is_probability(p: &Prob) -> bool {
    !p.is_negative() && *p <= Prob::one()
}

pub fn sum<'a>(items: impl IntoIterator<Item = &'a Prob>) -> Prob {
    items.into_iter().fold(Prob::zero(), |acc, p| acc + p)
}

/// `serde` adapter storing rationals as canonical strings.
pub mod serde_str {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(p: &Prob, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(p))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Prob, D::Error> {
        let raw = serde_json::Value::deserialize(d)?;
        let text = match raw {
            serde_json::Value::String(s) => s,
            serde_json::Value::Number(n) => n.to_string(),
            other => return Err(serde::de::Error::custom(format!("expected rational, got {other}"))),
        };
        parse_rational(&text).map_err(serde::de::Error::custom)
    }
}
