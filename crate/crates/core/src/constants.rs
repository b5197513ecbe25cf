//! The Thue–Morse sequence, the Komornik–Loreti constant β* and the golden
//! ratio G, as certified enclosures.

use std::sync::Mutex;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{rat, rational_to_f64, Rational};

/// Per-term multiplicative slack for float evaluation of partial sums.
pub const TERM_SLACK: f64 = 1e-12;

/// A closed interval known to contain a constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Enclosure {
    pub lo: f64,
    pub hi: f64,
}

impl Enclosure {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn is_inside(&self, outer: &Enclosure) -> bool {
        outer.lo <= self.lo && self.hi <= outer.hi
    }

    pub fn intersects(&self, other: &Enclosure) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// Interval product, both factors assumed positive.
    pub fn mul_positive(&self, other: &Enclosure) -> Enclosure {
        Enclosure {
            lo: next_down(self.lo * other.lo),
            hi: next_up(self.hi * other.hi),
        }
    }

    pub fn add_scalar(&self, c: f64) -> Enclosure {
        Enclosure {
            lo: next_down(self.lo + c),
            hi: next_up(self.hi + c),
        }
    }

    /// Outward-rounded float enclosure of an exact rational interval.
    pub fn from_rationals(lo: &Rational, hi: &Rational) -> Enclosure {
        Enclosure {
            lo: next_down(rational_to_f64(lo)),
            hi: next_up(rational_to_f64(hi)),
        }
    }
}

pub(crate) fn next_up(x: f64) -> f64 {
    if x.is_nan() || x == f64::INFINITY {
        return x;
    }
    if x == 0.0 {
        return f64::from_bits(1);
    }
    let bits = x.to_bits();
    f64::from_bits(if x > 0.0 { bits + 1 } else { bits - 1 })
}

pub(crate) fn next_down(x: f64) -> f64 {
    -next_up(-x)
}

/// Thue–Morse bit `𝔪_n` for `n ≥ 1`: parity of the 1-bits of `n - 1`, so
/// the sequence reads `0110 1001 1001 0110 ...`.
pub fn thue_morse(n: u64) -> Result<u8> {
    if n < 1 {
        return Err(Error::InvalidArgument("Thue-Morse index starts at 1".into()));
    }
    Ok(((n - 1).count_ones() & 1) as u8)
}

fn tm(n: u64) -> bool {
    (n - 1).count_ones() & 1 == 1
}

/// Which side of the root of `f(x) = Σ 𝔪_n x^{-n+1} - 1` a point lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    BelowRoot,
    AboveRoot,
    Unknown,
}

/// Float evaluation of `Σ_{n≤N} 𝔪_n x^{-n+1}` with guard factors, then the
/// tail bracket `[0, x^{-N}/(1 - 1/x)]`.
fn side_float(x: f64, terms: u64) -> Side {
    let y = 1.0 / x;
    let mut power = 1.0;
    let mut sum = 0.0;
    for n in 1..=terms {
        if tm(n) {
            sum += power;
        }
        power *= y;
    }
    let guard = (1.0 + TERM_SLACK).powi(terms as i32 + 2);
    let lo = sum / guard;
    let tail = power * guard / (1.0 - y * guard);
    let hi = sum * guard + tail;
    if lo > 1.0 {
        Side::BelowRoot
    } else if hi < 1.0 {
        Side::AboveRoot
    } else {
        Side::Unknown
    }
}

fn terms_for(precision: f64, x_lo: f64) -> u64 {
    // Tail at the left end of the bracket dominates; aim for precision/16.
    let target = precision / 16.0;
    let r = 1.0 / x_lo;
    let mut n = 8u64;
    while r.powi(n as i32) / (1.0 - r) > target && n < 4096 {
        n += 8;
    }
    n
}

const KL_BRACKET: (f64, f64) = (1.5, 2.0);

/// Smallest width a float enclosure of β* can honestly report.
pub const KL_FLOAT_FLOOR: f64 = 1e-15;

/// Enclosure of β* by bisection with float partial sums and a rigorous tail
/// bracket; `f` is strictly decreasing on `(1, ∞)`. Once the guarded float
/// evaluation can no longer decide a side, bisection continues in exact
/// rational arithmetic from the current bracket.
pub fn komornik_loreti(precision: f64) -> Result<Enclosure> {
    static CACHE: Mutex<Vec<(u64, Enclosure)>> = Mutex::new(Vec::new());
    let key = precision.to_bits();
    if let Some((_, e)) = CACHE.lock().expect("cache lock").iter().find(|(k, _)| *k == key) {
        return Ok(*e);
    }
    let e = komornik_loreti_uncached(precision)?;
    CACHE.lock().expect("cache lock").push((key, e));
    Ok(e)
}

fn komornik_loreti_uncached(precision: f64) -> Result<Enclosure> {
    if !(precision > 0.0) {
        return Err(Error::InvalidArgument("precision must be positive".into()));
    }
    if precision < KL_FLOAT_FLOOR {
        return Err(Error::PrecisionExhausted(format!(
            "{precision:e} is below the float resolution near β*; use komornik_loreti_exact"
        )));
    }
    let (mut lo, mut hi) = KL_BRACKET;
    let terms = terms_for(precision, lo);
    debug_assert_eq!(side_float(lo, terms), Side::BelowRoot);
    debug_assert_eq!(side_float(hi, terms), Side::AboveRoot);
    while hi - lo > precision {
        let mid = 0.5 * (lo + hi);
        match side_float(mid, terms) {
            Side::BelowRoot => lo = mid,
            Side::AboveRoot => hi = mid,
            Side::Unknown => break,
        }
    }
    if hi - lo <= precision {
        return Ok(Enclosure { lo, hi });
    }
    // Leave room for the two ulps of outward rounding.
    let target = precision - 4.0 * f64::EPSILON * hi;
    let width = Rational::from_float(target).ok_or_else(|| Error::NonFinite(target.to_string()))?;
    let lo = Rational::from_float(lo).ok_or_else(|| Error::NonFinite(lo.to_string()))?;
    let hi = Rational::from_float(hi).ok_or_else(|| Error::NonFinite(hi.to_string()))?;
    let (lo, hi) = bisect_exact(lo, hi, &width)?;
    let enc = Enclosure::from_rationals(&lo, &hi);
    if enc.width() > precision {
        return Err(Error::PrecisionExhausted(format!(
            "outward rounding widened the β* enclosure to {:.3e}",
            enc.width()
        )));
    }
    Ok(enc)
}

/// Side test with exact rational arithmetic, growing the number of terms
/// until the tail no longer hides the sign.
fn side_exact(x: &Rational) -> Side {
    let y = x.recip();
    let one = Rational::one();
    let mut terms = 32u64;
    loop {
        let mut power = Rational::one();
        let mut sum = Rational::zero();
        for n in 1..=terms {
            if tm(n) {
                sum += &power;
            }
            power *= &y;
        }
        let tail = &power / (&one - &y);
        if sum > one {
            return Side::BelowRoot;
        }
        if sum.clone() + tail < one {
            return Side::AboveRoot;
        }
        if terms > 1 << 14 {
            return Side::Unknown;
        }
        terms *= 2;
    }
}

/// Exact rational enclosure `[lo, hi]` of β* with `hi - lo ≤ width`,
/// bisecting on dyadic midpoints.
pub fn komornik_loreti_exact(width: &Rational) -> Result<(Rational, Rational)> {
    if !width.is_positive() {
        return Err(Error::InvalidArgument("width must be positive".into()));
    }
    static CACHE: Mutex<Vec<(Rational, (Rational, Rational))>> = Mutex::new(Vec::new());
    if let Some((_, e)) = CACHE.lock().expect("cache lock").iter().find(|(w, _)| w == width) {
        return Ok(e.clone());
    }
    let e = bisect_exact(rat(3, 2), rat(2, 1), width)?;
    CACHE.lock().expect("cache lock").push((width.clone(), e.clone()));
    Ok(e)
}

fn bisect_exact(mut lo: Rational, mut hi: Rational, width: &Rational) -> Result<(Rational, Rational)> {
    let two = Rational::from_integer(BigInt::from(2));
    while &hi - &lo > *width {
        let mid = (&lo + &hi) / &two;
        match side_exact(&mid) {
            Side::BelowRoot => lo = mid,
            Side::AboveRoot => hi = mid,
            Side::Unknown => {
                return Err(Error::PrecisionExhausted(
                    "β* side test did not resolve".into(),
                ))
            }
        }
    }
    Ok((lo, hi))
}

/// Exact rational enclosure of G = (1+√5)/2 by bisection on `x² - x - 1`.
pub fn golden_ratio_exact(width: &Rational) -> Result<(Rational, Rational)> {
    if !width.is_positive() {
        return Err(Error::InvalidArgument("width must be positive".into()));
    }
    let mut lo = rat(3, 2);
    let mut hi = rat(2, 1);
    let two = Rational::from_integer(BigInt::from(2));
    while &hi - &lo > *width {
        let mid = (&lo + &hi) / &two;
        if golden_cmp(&mid).is_lt() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi))
}

/// Compares a positive rational with G exactly: `x ≤ G ⟺ x² ≤ x + 1`.
pub fn golden_cmp(x: &Rational) -> std::cmp::Ordering {
    let lhs = x * x;
    let rhs = x + Rational::one();
    lhs.cmp(&rhs)
}

/// Float enclosure of G, outward-rounded from an exact rational bracket.
pub fn golden_ratio(precision: f64) -> Result<Enclosure> {
    if !(precision > 0.0) {
        return Err(Error::InvalidArgument("precision must be positive".into()));
    }
    if precision < 4.0 * f64::EPSILON {
        return Err(Error::PrecisionExhausted(format!(
            "{precision:e} is below the float resolution near G"
        )));
    }
    let w = Rational::from_float(precision / 4.0).ok_or_else(|| Error::NonFinite(precision.to_string()))?;
    let (lo, hi) = golden_ratio_exact(&w)?;
    Ok(Enclosure::from_rationals(&lo, &hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thue_morse_prefix() {
        let first: Vec<u8> = (1..=16).map(|n| thue_morse(n).unwrap()).collect();
        assert_eq!(first, [0, 1, 1, 0, 1, 0, 0, 1, 1, 0, 0, 1, 0, 1, 1, 0]);
        for k in 0..40 {
            assert_eq!(thue_morse((1u64 << k) + 1).unwrap(), 1);
        }
        assert!(thue_morse(0).is_err());
    }

    #[test]
    fn thue_morse_is_substitution_fixed_point() {
        for k in 1..=(1u64 << 16) {
            let pair = (thue_morse(2 * k - 1).unwrap(), thue_morse(2 * k).unwrap());
            let expected = if thue_morse(k).unwrap() == 0 { (0, 1) } else { (1, 0) };
            assert_eq!(pair, expected, "k = {k}");
        }
    }

    #[test]
    fn kl_coarse_enclosure() {
        let e = komornik_loreti(1e-4).unwrap();
        assert!(e.is_inside(&Enclosure { lo: 1.7871, hi: 1.7873 }), "{e:?}");
        assert!(e.width() <= 1e-4);
    }

    #[test]
    fn kl_root_below_two() {
        // f(2) plus the whole tail bracket is still negative.
        assert_eq!(side_float(2.0, 64), Side::AboveRoot);
        assert_eq!(side_exact(&rat(2, 1)), Side::AboveRoot);
    }

    #[test]
    fn kl_enclosures_nest() {
        let coarse = komornik_loreti(1e-4).unwrap();
        let fine = komornik_loreti(1e-10).unwrap();
        assert!(fine.is_inside(&coarse));
        let (lo, hi) = komornik_loreti_exact(&rat(1, 1_000_000_000_000)).unwrap();
        let exact = Enclosure::from_rationals(&lo, &hi);
        assert!(exact.intersects(&fine));
        assert!(exact.contains(1.787_231_650_182_966));
    }

    #[test]
    fn kl_float_precision_has_a_floor() {
        assert!(matches!(komornik_loreti(1e-17), Err(Error::PrecisionExhausted(_))));
        let e = komornik_loreti(1e-14).unwrap();
        assert!(e.width() <= 1e-14 && e.contains(1.787_231_650_182_966));
    }

    #[test]
    fn golden_ratio_enclosure() {
        let g = golden_ratio(1e-4).unwrap();
        assert!(g.is_inside(&Enclosure { lo: 1.6180, hi: 1.6181 }));
        let sq = g.mul_positive(&g);
        assert!(sq.intersects(&g.add_scalar(1.0)));
        let kl = komornik_loreti(1e-4).unwrap();
        assert!(g.hi < kl.lo);
        let fine = golden_ratio(1e-12).unwrap();
        assert!(fine.is_inside(&g));
    }

    #[test]
    fn golden_comparison_is_exact() {
        assert!(golden_cmp(&rat(1618, 1000)).is_lt());
        assert!(golden_cmp(&rat(1619, 1000)).is_gt());
    }
}
