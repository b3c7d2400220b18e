//! Exact rational numbers used for sizes, values, bids and payments.
//!
//! All auction arithmetic runs on [`Rational`] (`Ratio<i128>`), so per-unit
//! comparisons never suffer floating-point ties. On the wire a rational is
//! either a plain JSON integer or an object `{"num": n, "den": d}`.

use std::fmt;

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type Rational = Ratio<i128>;

/// Builds `num / den`. Panics if `den` is zero.
pub fn ratio(num: i128, den: i128) -> Rational {
    Rational::new(num, den)
}

pub fn int(n: i128) -> Rational {
    Rational::from_integer(n)
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact text form: `"7"` for integers, `"7/2"` otherwise.
pub fn format(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `"7"`, `"-7/2"` or a finite decimal such as `"9.9"`.
pub fn parse(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: i128 = n.trim().parse().ok()?;
        let d: i128 = d.trim().parse().ok()?;
        if d == 0 {
            return None;
        }
        return Some(ratio(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || frac.len() > 18 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let (negative, whole) = match whole.strip_prefix('-') {
            Some(w) => (true, w),
            None => (false, whole.strip_prefix('+').unwrap_or(whole)),
        };
        if !whole.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let whole_abs: i128 = if whole.is_empty() { 0 } else { whole.parse().ok()? };
        let scale = 10i128.pow(frac.len() as u32);
        let frac_n: i128 = frac.parse().ok()?;
        let magnitude = whole_abs * scale + frac_n;
        return Some(ratio(if negative { -magnitude } else { magnitude }, scale));
    }
    s.parse::<i128>().ok().map(int)
}

/// JSON representation of a rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RationalRepr {
    Int(i64),
    Frac { num: i64, den: i64 },
}

impl RationalRepr {
    pub fn from_rational(r: &Rational) -> Option<Self> {
        let num = i64::try_from(*r.numer()).ok()?;
        let den = i64::try_from(*r.denom()).ok()?;
        Some(if den == 1 { RationalRepr::Int(num) } else { RationalRepr::Frac { num, den } })
    }

    pub fn to_rational(self) -> Option<Rational> {
        match self {
            RationalRepr::Int(n) => Some(int(n as i128)),
            RationalRepr::Frac { den: 0, .. } => None,
            RationalRepr::Frac { num, den } => Some(ratio(num as i128, den as i128)),
        }
    }
}

/// Display adapter producing the exact text form.
pub struct Exact<'a>(pub &'a Rational);

impl fmt::Display for Exact<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format(self.0))
    }
}

/// `#[serde(with = "crate::rational::json")]` for a single rational field.
pub mod json {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        RationalRepr::from_rational(r)
            .ok_or_else(|| serde::ser::Error::custom("rational out of i64 range"))?
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        RationalRepr::deserialize(d)?.to_rational().ok_or_else(|| D::Error::custom("zero denominator"))
    }
}

/// Same as [`json`] for `Vec<Rational>`.
pub mod json_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        let reprs = v
            .iter()
            .map(RationalRepr::from_rational)
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| serde::ser::Error::custom("rational out of i64 range"))?;
        reprs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        Vec::<RationalRepr>::deserialize(d)?
            .into_iter()
            .map(|r| r.to_rational().ok_or_else(|| D::Error::custom("zero denominator")))
            .collect()
    }
}

/// Same as [`json`] for `Option<Rational>`.
pub mod json_opt {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(r) => super::json::serialize(r, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        Option::<RationalRepr>::deserialize(d)?
            .map(|r| r.to_rational().ok_or_else(|| D::Error::custom("zero denominator")))
            .transpose()
    }
}

pub(crate) fn sum<'a>(it: impl IntoIterator<Item = &'a Rational>) -> Rational {
    it.into_iter().fold(Rational::zero(), |acc, x| acc + x)
}
