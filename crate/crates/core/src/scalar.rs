//! Numeric backends.
//!
//! Every analytic routine is generic over [`Scalar`], implemented for `f64`
//! and for arbitrary-precision rationals ([`Rational`]). The rational backend
//! makes boundary equalities exact: a weak inequality that holds with
//! equality is decided without any tolerance.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Exact rational number used by the `--exact` mode.
pub type Rational = BigRational;

/// Default absolute tolerance for floating-point comparisons.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// Environment variable that overrides [`DEFAULT_TOLERANCE`].
pub const TOLERANCE_ENV: &str = "COOPDESIGN_TOL";

pub trait Scalar:
    Clone + fmt::Debug + fmt::Display + PartialOrd + Num + Signed + Send + Sync + 'static
{
    /// `true` when arithmetic is exact and comparisons ignore tolerances.
    const EXACT: bool;

    fn from_ratio(num: i64, den: i64) -> Self;
    fn from_quantity(q: &Quantity) -> Self;
    fn to_f64(&self) -> f64;
    fn floor(&self) -> Self;

    fn from_usize(n: usize) -> Self {
        Self::from_ratio(n as i64, 1)
    }

    fn powi(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = acc * self.clone();
        }
        acc
    }

    fn max_of(a: Self, b: Self) -> Self {
        if a >= b {
            a
        } else {
            b
        }
    }

    fn min_of(a: Self, b: Self) -> Self {
        if a <= b {
            a
        } else {
            b
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn from_quantity(q: &Quantity) -> Self {
        q.approx
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn floor(&self) -> Self {
        f64::floor(*self)
    }

    fn powi(&self, n: u32) -> Self {
        f64::powi(*self, n as i32)
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_ratio(num: i64, den: i64) -> Self {
        Rational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_quantity(q: &Quantity) -> Self {
        q.exact.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn floor(&self) -> Self {
        Rational::floor(self)
    }
}

/// Continuation weight `δ/(1−δ)`: the discounted number of future periods.
pub fn continuation_weight<S: Scalar>(delta: &S) -> S {
    delta.clone() / (S::one() - delta.clone())
}

/// Absolute comparison tolerance. Ignored by exact backends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance(pub f64);

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance(DEFAULT_TOLERANCE)
    }
}

impl Tolerance {
    /// Reads `COOPDESIGN_TOL`, falling back to the default.
    pub fn from_env() -> Result<Self> {
        match std::env::var(TOLERANCE_ENV) {
            Ok(raw) => {
                let v: f64 = raw.trim().parse().map_err(|_| {
                    Error::invalid(format!("{TOLERANCE_ENV}={raw:?} is not a number"))
                })?;
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::invalid(format!(
                        "{TOLERANCE_ENV} must be a finite non-negative number"
                    )));
                }
                Ok(Tolerance(v))
            }
            Err(_) => Ok(Tolerance::default()),
        }
    }

    /// `a ≤ b`, up to tolerance.
    pub fn le<S: Scalar>(&self, a: &S, b: &S) -> bool {
        if S::EXACT {
            a <= b
        } else {
            (a.clone() - b.clone()).to_f64() <= self.0
        }
    }

    /// `a < b` by more than the tolerance.
    pub fn lt<S: Scalar>(&self, a: &S, b: &S) -> bool {
        !self.le(b, a)
    }

    pub fn eq<S: Scalar>(&self, a: &S, b: &S) -> bool {
        self.le(a, b) && self.le(b, a)
    }

    pub fn is_zero<S: Scalar>(&self, a: &S) -> bool {
        self.eq(a, &S::zero())
    }
}

/// A scenario number: parsed once, usable by either backend.
///
/// Accepts JSON numbers (interpreted through their shortest decimal form, so
/// `0.6` is exactly `3/5`) and strings such as `"3/5"`, `"-0.1"` or `"1e-3"`.
#[derive(Debug, Clone, PartialEq)]
pub struct Quantity {
    pub exact: Rational,
    pub approx: f64,
}

impl Quantity {
    pub fn from_f64(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::invalid(format!("non-finite number {x}")));
        }
        let exact = parse_decimal(&format!("{x}"))?;
        Ok(Quantity { exact, approx: x })
    }

    pub fn from_rational(exact: Rational) -> Self {
        let approx = Scalar::to_f64(&exact);
        Quantity { exact, approx }
    }

    pub fn get<S: Scalar>(&self) -> S {
        S::from_quantity(self)
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let exact = match s.split_once('/') {
            Some((n, d)) => {
                let n = parse_decimal(n.trim())?;
                let d = parse_decimal(d.trim())?;
                if d.is_zero() {
                    return Err(Error::invalid(format!("zero denominator in {s:?}")));
                }
                n / d
            }
            None => parse_decimal(s)?,
        };
        Ok(Quantity::from_rational(exact))
    }
}

impl From<f64> for Quantity {
    fn from(x: f64) -> Self {
        Quantity::from_f64(x).unwrap_or(Quantity {
            exact: Rational::zero(),
            approx: x,
        })
    }
}

impl Serialize for Quantity {
    fn serialize<Ser: Serializer>(&self, s: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        // Numbers only when the decimal form reproduces the exact value.
        let decimal_exact = self.approx.is_finite()
            && parse_decimal(&format!("{}", self.approx)).is_ok_and(|d| d == self.exact);
        if decimal_exact {
            s.serialize_f64(self.approx)
        } else {
            s.serialize_str(&self.exact.to_string())
        }
    }
}

impl<'de> Deserialize<'de> for Quantity {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Quantity::from_f64(x).map_err(serde::de::Error::custom),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Parses a plain decimal literal (optional sign, fraction and exponent)
/// into an exact rational.
pub fn parse_decimal(s: &str) -> Result<Rational> {
    let bad = || Error::invalid(format!("malformed number {s:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => {
            let e: i64 = s[i + 1..].parse().map_err(|_| bad())?;
            (&s[..i], e)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
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
    let all = format!("{int_part}{frac_part}");
    let mut value = Rational::from_integer(BigInt::from_str_radix(&all, 10).map_err(|_| bad())?);
    let scale = exponent - frac_part.len() as i64;
    let ten = Rational::from_integer(BigInt::from(10));
    if scale.unsigned_abs() > 4096 {
        return Err(bad());
    }
    let factor = num_traits::pow(ten, scale.unsigned_abs() as usize);
    if scale >= 0 {
        value *= factor;
    } else {
        value /= factor;
    }
    if negative {
        value = -value;
    }
    Ok(value)
}

/// Exact rendering for reports: integers and fractions as `p/q` strings.
pub fn exact_string<S: Scalar>(x: &S) -> String {
    if S::EXACT {
        x.to_string()
    } else {
        format!("{}", x.to_f64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(num: i64, den: i64) -> Rational {
        Rational::from_ratio(num, den)
    }

    #[test]
    fn decimals_parse_exactly() {
        assert_eq!(parse_decimal("0.6").unwrap(), q(3, 5));
        assert_eq!(parse_decimal("-0.1").unwrap(), q(-1, 10));
        assert_eq!(parse_decimal("1e-3").unwrap(), q(1, 1000));
        assert_eq!(parse_decimal("2.5E2").unwrap(), q(250, 1));
        assert_eq!(parse_decimal(".75").unwrap(), q(3, 4));
        assert!(parse_decimal("").is_err());
        assert!(parse_decimal("1.2.3").is_err());
        assert!(parse_decimal("abc").is_err());
    }

    #[test]
    fn quantity_from_json_number_is_decimal_exact() {
        let x: Quantity = serde_json::from_str("0.6").unwrap();
        assert_eq!(x.exact, q(3, 5));
        assert_eq!(x.approx, 0.6);
        let y: Quantity = serde_json::from_str("\"1/3\"").unwrap();
        assert_eq!(y.exact, q(1, 3));
        assert!((y.approx - 1.0 / 3.0).abs() < 1e-16);
        assert!(serde_json::from_str::<Quantity>("\"1/0\"").is_err());
    }

    #[test]
    fn quantity_serializes_non_decimal_fractions_as_strings() {
        let third = Quantity::from_rational(q(1, 3));
        assert_eq!(serde_json::to_string(&third).unwrap(), "\"1/3\"");
        let half = Quantity::from_rational(q(1, 2));
        assert_eq!(serde_json::to_string(&half).unwrap(), "0.5");
    }

    #[test]
    fn tolerance_is_ignored_by_exact_backend() {
        let tol = Tolerance(1e-3);
        assert!(tol.le(&1.0005_f64, &1.0));
        assert!(!tol.le(&q(10005, 10000), &q(1, 1)));
        assert!(tol.eq(&q(1, 3), &q(2, 6)));
        assert!(tol.lt(&0.0_f64, &0.01));
        assert!(!tol.lt(&0.0_f64, &0.0005));
    }

    #[test]
    fn continuation_weight_at_three_fifths() {
        assert_eq!(continuation_weight(&q(3, 5)), q(3, 2));
        assert!((continuation_weight(&0.6_f64) - 1.5).abs() < 1e-15);
    }
}
