//! Scalar abstraction shared by the floating-point and exact code paths.
//!
//! Every metric in [`crate::kernel`] is written once against [`Scalar`] and
//! instantiated with `f64` for searching and with [`Rational`] wherever a
//! result has to be exact.

use std::fmt::Debug;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact arbitrary-precision rational, always kept in lowest terms.
pub type Rational = BigRational;

pub trait Scalar:
    num_traits::Num + Signed + Clone + PartialOrd + Debug + Send + Sync + 'static
{
    fn from_ratio(num: i64, den: i64) -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn to_f64(&self) -> f64;
    fn floor(&self) -> Self;

    fn from_usize(v: usize) -> Self {
        Self::from_ratio(v as i64, 1)
    }

    /// Representative of `self` modulo 1 in `[0, 1)`.
    fn frac(&self) -> Self {
        self.clone() - self.floor()
    }
}

impl Scalar for f64 {
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn from_rational(r: &Rational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn floor(&self) -> Self {
        f64::floor(*self)
    }
    fn frac(&self) -> Self {
        let r = *self - f64::floor(*self);
        // x - floor(x) rounds up to 1.0 for tiny negative x
        if r >= 1.0 {
            0.0
        } else {
            r
        }
    }
}

impl Scalar for Rational {
    fn from_ratio(num: i64, den: i64) -> Self {
        Rational::new(BigInt::from(num), BigInt::from(den))
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn floor(&self) -> Self {
        BigRational::floor(self)
    }
}

/// Which arithmetic a metric is evaluated in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScalarMode {
    #[default]
    Float,
    Exact,
}

/// Exact value of a finite double. Every finite `f64` is a dyadic rational.
pub fn rational_from_f64(v: f64) -> Result<Rational> {
    Rational::from_f64(v).ok_or_else(|| Error::Config(format!("non-finite value {v}")))
}

/// Formats as `"p/q"`, including `"n/1"` for integers.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `"p/q"`, an integer, or a decimal literal (optionally with an
/// exponent) into the rational it denotes exactly.
pub fn parse_rational(s: &str) -> std::result::Result<Rational, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty number".into());
    }
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| format!("bad numerator in {s:?}"))?;
        let q = BigInt::from_str(q.trim()).map_err(|_| format!("bad denominator in {s:?}"))?;
        if q.is_zero() {
            return Err(format!("zero denominator in {s:?}"));
        }
        return Ok(Rational::new(p, q));
    }
    parse_decimal(s).ok_or_else(|| format!("not a number: {s:?}"))
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.as_bytes().first()? {
        b'-' => (true, &mantissa[1..]),
        b'+' => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((a, b)) => (a, b),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut value = Rational::from_integer(BigInt::from_str(&digits).ok()?);
    let scale = exponent - frac_part.len() as i32;
    let ten = Rational::from_integer(BigInt::from(10));
    let factor = num_traits::pow(ten, scale.unsigned_abs() as usize);
    if scale >= 0 {
        value *= factor;
    } else {
        value /= factor;
    }
    Some(if neg { -value } else { value })
}

/// Square root of a non-negative rational when both numerator and
/// denominator are perfect squares.
pub fn exact_sqrt(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let p = r.numer().sqrt();
    let q = r.denom().sqrt();
    if &(&p * &p) == r.numer() && &(&q * &q) == r.denom() {
        Some(Rational::new(p, q))
    } else {
        None
    }
}
