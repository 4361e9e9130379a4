//! Exact money type, numeric mode and the scalar abstraction used by the LP engine.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{PricingError, Result};

/// Every value, price and profit is an exact rational.
pub type Money = BigRational;

pub fn money(n: i64) -> Money {
    Money::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Money {
    Money::new(BigInt::from(n), BigInt::from(d))
}

/// Exact binary expansion of a finite double.
pub fn from_f64(x: f64) -> Money {
    Money::from_float(x).unwrap_or_else(<Money as Zero>::zero)
}

pub fn to_f64(x: &Money) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Parses `"3"`, `"-2.75"`, `"1/3"` or `"1e-3"` into an exact rational.
pub fn parse_money(s: &str) -> Result<Money> {
    let s = s.trim();
    let bad = || PricingError::Parse(format!("not a number: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Money::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: String = format!("{int_part}{frac_part}");
    let numer = BigInt::from_str(if all.is_empty() { "0" } else { &all }).map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        Money::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Money::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        value = -value;
    }
    Ok(value)
}

/// Canonical text form: `"5"` or `"25/12"`.
pub fn format_money(x: &Money) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Harmonic number `1 + 1/2 + ... + 1/k`.
pub fn harmonic(k: u32) -> Money {
    (1..=k).fold(<Money as Zero>::zero(), |acc, t| acc + ratio(1, t as i64))
}

/// Arithmetic used by the LP engine and the tolerance it is judged at.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Numeric {
    /// Rational arithmetic; every certificate holds with tolerance zero.
    #[default]
    Exact,
    /// Double precision; certificates hold up to [`FLOAT_TOLERANCE`].
    Float,
}

pub const FLOAT_TOLERANCE: f64 = 1e-6;

impl Numeric {
    pub fn tolerance(self) -> Money {
        match self {
            Numeric::Exact => <Money as Zero>::zero(),
            Numeric::Float => ratio(1, 1_000_000),
        }
    }
}

impl fmt::Display for Numeric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Numeric::Exact => "exact",
            Numeric::Float => "float",
        })
    }
}

impl FromStr for Numeric {
    type Err = PricingError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Numeric::Exact),
            "float" => Ok(Numeric::Float),
            other => Err(PricingError::Parse(format!("unknown numeric mode {other:?}"))),
        }
    }
}

/// `a <= b + tol`.
pub fn le_tol(a: &Money, b: &Money, tol: &Money) -> bool {
    a <= &(b + tol)
}

/// Serde adapter writing money as its canonical string and reading strings
/// or JSON numbers.
pub mod serde_money {
    use super::{format_money, from_f64, parse_money, Money};
    use serde::{de, Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    pub(crate) enum Raw {
        Text(String),
        Int(i64),
        Float(f64),
    }

    impl Raw {
        pub(crate) fn into_money<E: de::Error>(self) -> Result<Money, E> {
            match self {
                Raw::Text(s) => parse_money(&s).map_err(E::custom),
                Raw::Int(i) => Ok(super::money(i)),
                Raw::Float(f) if f.is_finite() => parse_money(&f.to_string()).or_else(|_| Ok(from_f64(f))),
                Raw::Float(_) => Err(E::custom("non-finite number")),
            }
        }
    }

    pub fn serialize<S: Serializer>(x: &Money, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_money(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Money, D::Error> {
        Raw::deserialize(d)?.into_money()
    }
}

/// [`serde_money`] for sequences.
pub mod serde_money_vec {
    use super::serde_money::Raw;
    use super::{format_money, Money};
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(xs: &[Money], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(xs.len()))?;
        for x in xs {
            seq.serialize_element(&format_money(x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Money>, D::Error> {
        Vec::<Raw>::deserialize(d)?.into_iter().map(Raw::into_money).collect()
    }
}

/// Field operations the simplex tableau needs.
pub trait Scalar: Clone + fmt::Debug + PartialOrd {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Pivot threshold: anything with magnitude at or below it counts as zero.
    fn eps() -> Self;
    fn from_money(m: &Money) -> Self;
    fn to_money(&self) -> Money;

    fn is_pos(&self) -> bool {
        *self > Self::eps()
    }
    fn is_neg(&self) -> bool {
        self.neg() > Self::eps()
    }
    fn is_zero_ish(&self) -> bool {
        !self.is_pos() && !self.is_neg()
    }
}

impl Scalar for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn eps() -> Self {
        Zero::zero()
    }
    fn from_money(m: &Money) -> Self {
        m.clone()
    }
    fn to_money(&self) -> Money {
        self.clone()
    }
    fn is_pos(&self) -> bool {
        self.is_positive()
    }
    fn is_neg(&self) -> bool {
        self.is_negative()
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn eps() -> Self {
        1e-9
    }
    fn from_money(m: &Money) -> Self {
        to_f64(m)
    }
    fn to_money(&self) -> Money {
        if self.abs() <= 1e-12 {
            <Money as Zero>::zero()
        } else {
            from_f64(*self)
        }
    }
}
