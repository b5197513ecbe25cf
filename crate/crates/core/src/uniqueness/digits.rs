//! Digit constraints from the spectrum and subsequence reduction.

use num_integer::Integer;
use serde::Serialize;

use crate::attractor::Address;
use crate::error::{Error, Result};
use crate::spectral::{minimal_real_power, Angle, SpectralSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DigitConstraint {
    Free,
    Plus,
    Minus,
}

/// Sign of `Im κ^j` for `κ = r·e^{iπp/s}`: sign of `sin(jpπ/s)`.
fn im_sign(p: u64, s: u64, j: u64) -> i8 {
    let t = (j * p) % (2 * s);
    if t == 0 || t == s {
        0
    } else if t < s {
        1
    } else {
        -1
    }
}

/// Positions `j < horizon`: `Free` when `q | j` (every `κ^j` real),
/// otherwise the sign of `Im κ^j` for the first block, in block order,
/// where it is non-zero.
pub fn constrained_digits(spec: &SpectralSpec, horizon: usize) -> Result<Vec<DigitConstraint>> {
    let q = minimal_real_power(spec)?;
    let angles: Vec<(u64, u64)> = spec
        .blocks()
        .iter()
        .filter_map(|b| match b.angle() {
            Some(Angle::RationalPi { p, s }) => Some((*p, *s)),
            _ => None,
        })
        .collect();
    Ok((0..horizon as u64)
        .map(|j| {
            if j % q == 0 {
                return DigitConstraint::Free;
            }
            match angles.iter().map(|&(p, s)| im_sign(p, s, j)).find(|&x| x != 0) {
                Some(1) => DigitConstraint::Plus,
                Some(_) => DigitConstraint::Minus,
                None => DigitConstraint::Free,
            }
        })
        .collect())
}

/// The subsequence `a_j a_{j+q} a_{j+2q} ...`, an address for `(M^q, u)`.
pub fn reduce_subsequence(a: &Address, q: usize, j: usize) -> Result<Address> {
    if q == 0 || j >= q {
        return Err(Error::InvalidArgument(format!("need 0 ≤ j < q, got j={j}, q={q}")));
    }
    let l = a.preperiod();
    let Some(period) = a.period() else {
        let head = a.head().iter().skip(j).step_by(q).copied().collect();
        return Address::finite(head);
    };
    let p = period.len();
    // First t with j + qt ≥ ℓ.
    let t0 = if j >= l { 0 } else { (l - j).div_ceil(q) };
    let new_p = p / p.gcd(&q);
    let digits = a.prefix(j + q * (t0 + new_p))?;
    let pick = |t: usize| digits[j + q * t];
    let head = (0..t0).map(pick).collect();
    let cycle = (t0..t0 + new_p).map(pick).collect();
    Ok(Address::periodic(head, cycle)?.normalized())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use crate::spectral::SpectralBlock;
    use DigitConstraint::*;

    #[test]
    fn quarter_turn_alternates() {
        let spec = SpectralSpec::exact(vec![SpectralBlock::rotation(
            rat(19, 20),
            Angle::rational_pi(1, 2).unwrap(),
        )
        .unwrap()])
        .unwrap();
        let c = constrained_digits(&spec, 8).unwrap();
        assert_eq!(c, vec![Free, Plus, Free, Minus, Free, Plus, Free, Minus]);
    }

    #[test]
    fn real_spectrum_is_free() {
        let spec = SpectralSpec::exact(vec![SpectralBlock::real(rat(-1, 2)).unwrap()]).unwrap();
        assert!(constrained_digits(&spec, 5).unwrap().iter().all(|&c| c == Free));
    }

    #[test]
    fn subsequence_of_periodic_word() {
        let a: Address = "+-(++-)".parse().unwrap();
        let digits = a.prefix(60).unwrap();
        for q in 1..5 {
            for j in 0..q {
                let r = reduce_subsequence(&a, q, j).unwrap();
                let got = r.prefix(12).unwrap();
                let want: Vec<i8> = (0..12).map(|t| digits[j + q * t]).collect();
                assert_eq!(got, want, "q={q} j={j}");
            }
        }
        assert!(reduce_subsequence(&a, 2, 2).is_err());
    }
}
