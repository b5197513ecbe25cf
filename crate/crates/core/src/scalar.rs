//! Arithmetic backends.
//!
//! Every numeric routine in the crate is generic over [`Scalar`], which has
//! two implementations: [`Rational`] (arbitrary precision, exact comparisons)
//! and `f64` (fast, with a multiplicative guard on every certified
//! comparison).

use std::fmt::Debug;
use std::hash::Hash;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Relative guard applied to float-mode certified comparisons.
pub const FLOAT_GUARD: f64 = 1e-9;

/// Absolute floor added to float-mode guards so that comparisons against
/// zero bounds stay conservative.
pub const FLOAT_ABS_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArithmeticMode {
    Exact,
    Float,
}

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Hashable identity of a value, used for state memoisation.
    type Key: Hash + Eq + Clone + Send + Sync + Debug;

    const MODE: ArithmeticMode;

    fn from_rational(r: &Rational) -> Self;
    fn from_i64(v: i64) -> Self;
    fn to_f64(&self) -> f64;
    fn abs(&self) -> Self;
    fn key(&self) -> Self::Key;

    /// `self > bound`, conservatively: in float mode the bound is inflated by
    /// [`FLOAT_GUARD`] first, so `true` survives rounding.
    fn definitely_exceeds(&self, bound: &Self) -> bool;

    /// Inflates an upper bound so it stays an upper bound under rounding.
    fn guard_up(&self) -> Self;

    fn is_exact() -> bool {
        Self::MODE == ArithmeticMode::Exact
    }
}

impl Scalar for Rational {
    type Key = Rational;
    const MODE: ArithmeticMode = ArithmeticMode::Exact;

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }
    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn key(&self) -> Rational {
        self.clone()
    }
    fn definitely_exceeds(&self, bound: &Self) -> bool {
        self > bound
    }
    fn guard_up(&self) -> Self {
        self.clone()
    }
}

impl Scalar for f64 {
    type Key = u64;
    const MODE: ArithmeticMode = ArithmeticMode::Float;

    fn from_rational(r: &Rational) -> Self {
        rational_to_f64(r)
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn key(&self) -> u64 {
        // +0.0 and -0.0 must share a key.
        if *self == 0.0 {
            0
        } else {
            self.to_bits()
        }
    }
    fn definitely_exceeds(&self, bound: &Self) -> bool {
        *self > bound.guard_up()
    }
    fn guard_up(&self) -> Self {
        if *self >= 0.0 {
            *self * (1.0 + FLOAT_GUARD) + FLOAT_ABS_GUARD
        } else {
            *self * (1.0 - FLOAT_GUARD) + FLOAT_ABS_GUARD
        }
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    if let Some(v) = ToPrimitive::to_f64(r) {
        if v.is_finite() {
            return v;
        }
    }
    // Huge numerators and denominators overflow the direct conversion; scale
    // both down to a common bit budget first.
    let n = r.numer();
    let d = r.denom();
    let shift = n.bits().max(d.bits()).saturating_sub(1000) as usize;
    let n = n >> shift;
    let d = d >> shift;
    match (n.to_f64(), d.to_f64()) {
        (Some(a), Some(b)) if b != 0.0 => a / b,
        _ => 0.0,
    }
}

/// Exact rational for an `f64`; every finite double is a dyadic rational.
pub fn f64_to_rational(v: f64) -> Result<Rational> {
    Rational::from_float(v).ok_or_else(|| Error::NonFinite(v.to_string()))
}

/// Parses `a/b`, a decimal such as `-0.95` or `1.5e-3`, or an integer into
/// an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let t = text.trim();
    let bad = || Error::Number(t.to_string());
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((num, den)) = t.split_once('/') {
        let n = parse_decimal(num).ok_or_else(bad)?;
        let d = parse_decimal(den).ok_or_else(bad)?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(n / d);
    }
    parse_decimal(t).ok_or_else(bad)
}

fn parse_decimal(text: &str) -> Option<Rational> {
    let t = text.trim();
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().ok()?),
        None => (t, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first()? {
        b'-' => (true, &mantissa[1..]),
        b'+' => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let all: String = format!("{int_part}{frac_part}");
    let mut value = Rational::from_integer(all.parse::<BigInt>().ok()?);
    let scale = exponent - frac_part.len() as i32;
    let ten = Rational::from_integer(BigInt::from(10));
    if scale >= 0 {
        value *= num_traits::pow(ten, scale as usize);
    } else {
        value /= num_traits::pow(ten, (-scale) as usize);
    }
    Some(if negative { -value } else { value })
}

/// `a/b` text for a rational, or the bare integer.
pub fn rational_text(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Decimal text of `r` with `digits` places, rounded down or up.
pub fn rational_decimal(r: &Rational, digits: usize, round_up: bool) -> String {
    let scaled = r * Rational::from_integer(num_traits::pow(BigInt::from(10), digits));
    let n = if round_up { scaled.ceil() } else { scaled.floor() }.to_integer();
    let sign = if n.is_negative() { "-" } else { "" };
    let mut text = n.abs().to_string();
    if digits == 0 {
        return format!("{sign}{text}");
    }
    if text.len() <= digits {
        text = format!("{}{text}", "0".repeat(digits + 1 - text.len()));
    }
    let (int, frac) = text.split_at(text.len() - digits);
    format!("{sign}{int}.{frac}")
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}
