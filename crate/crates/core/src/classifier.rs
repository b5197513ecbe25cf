//! Decision rules: the four-way classification of the set of uniqueness and
//! the determinant verdicts for interior and connectivity.

use std::cmp::Ordering;

use num_traits::{One, Signed};
use serde::Serialize;

use crate::constants::{golden_cmp, komornik_loreti, komornik_loreti_exact, Enclosure};
use crate::error::{Error, Result};
use crate::scalar::{rat, rational_text, rational_to_f64, Rational};
use crate::spectral::{minimal_real_power, sign_of_power, Angle, Modulus, SpectralSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    FiniteNonEmpty,
    InfiniteCountable,
    UncountableZeroDim,
    PositiveHausdorffDim,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Rule {
    Jordan,
    IrrationalAngle,
    DistinctModuli,
    RationalEqualModuli,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Confidence {
    Exact,
    Heuristic,
}

/// β either as an exact rational or as a float from a heuristic spectrum.
#[derive(Debug, Clone, PartialEq)]
pub enum Beta {
    Exact(Rational),
    Approx(f64),
}

impl Beta {
    pub fn to_f64(&self) -> f64 {
        match self {
            Beta::Exact(r) => rational_to_f64(r),
            Beta::Approx(v) => *v,
        }
    }

    pub fn exact_text(&self) -> Option<String> {
        match self {
            Beta::Exact(r) => Some(rational_text(r)),
            Beta::Approx(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniquenessClass {
    pub verdict: Verdict,
    pub rule: Rule,
    pub beta: Option<Beta>,
    pub q: Option<u64>,
    /// Sign of `κ^q` per block, in block order (rational equal-moduli case).
    pub signs: Vec<i8>,
    pub sign_conflict: bool,
    pub confidence: Confidence,
    /// Enclosure of β* that separated β from it, when one was needed.
    pub beta_star: Option<Enclosure>,
    pub trace: Vec<String>,
}

/// Relative uncertainty attached to a float β.
const APPROX_BETA_SLACK: f64 = 1e-9;

/// Finest rational enclosure width tried for β* before giving up.
const FINEST_BETA_STAR_EXPONENT: u32 = 120;

pub fn classify_uniqueness(spec: &SpectralSpec) -> Result<UniquenessClass> {
    let confidence = if spec.is_heuristic() {
        Confidence::Heuristic
    } else {
        Confidence::Exact
    };
    let positive = |rule: Rule, why: String| UniquenessClass {
        verdict: Verdict::PositiveHausdorffDim,
        rule,
        beta: None,
        q: None,
        signs: Vec::new(),
        sign_conflict: false,
        confidence,
        beta_star: None,
        trace: vec![why],
    };
    let blocks = spec.blocks();

    if let Some(i) = blocks.iter().position(|b| b.is_jordan()) {
        return Ok(positive(
            Rule::Jordan,
            format!("block {i} is a non-trivial Jordan block"),
        ));
    }
    if let Some(i) = blocks
        .iter()
        .position(|b| matches!(b.angle(), Some(Angle::Irrational(_))))
    {
        return Ok(positive(
            Rule::IrrationalAngle,
            format!("block {i} has arg(κ)/π irrational"),
        ));
    }
    let tol = match spec.provenance() {
        crate::spectral::Provenance::HeuristicFromMatrix { tolerance } => tolerance.sqrt(),
        crate::spectral::Provenance::Exact => 0.0,
    };
    let first = &blocks[0].modulus;
    if let Some(i) = blocks.iter().position(|b| !moduli_equal(first, &b.modulus, tol)) {
        return Ok(positive(
            Rule::DistinctModuli,
            format!(
                "|κ| differs between block 0 ({}) and block {i} ({})",
                first.text(),
                blocks[i].modulus.text()
            ),
        ));
    }

    let q = minimal_real_power(spec)?;
    let signs = blocks
        .iter()
        .map(|b| sign_of_power(b, q))
        .collect::<Result<Vec<i8>>>()?;
    let sign_conflict = signs.iter().any(|&s| s != signs[0]);
    let exponent = if sign_conflict { 2 * q } else { q };
    let beta = match first {
        Modulus::Exact(r) => Beta::Exact(num_traits::pow(r.recip(), exponent as usize)),
        Modulus::Approx(v) => Beta::Approx(v.powf(-(exponent as f64))),
    };
    let mut trace = vec![
        format!("all moduli equal {}; every angle is a rational multiple of π", first.text()),
        format!("minimal real power q = {q}; signs of κ^q = {signs:?}"),
        if sign_conflict {
            format!("sign conflict: β = |κ|^(-2q) = |κ|^(-{exponent})")
        } else {
            format!("no sign conflict: β = |κ|^(-q) = |κ|^(-{exponent})")
        },
    ];
    let (verdict, beta_star) = bucket(&beta, &mut trace)?;
    Ok(UniquenessClass {
        verdict,
        rule: Rule::RationalEqualModuli,
        beta: Some(beta),
        q: Some(q),
        signs,
        sign_conflict,
        confidence,
        beta_star,
        trace,
    })
}

fn moduli_equal(a: &Modulus, b: &Modulus, tol: f64) -> bool {
    match (a, b) {
        (Modulus::Exact(x), Modulus::Exact(y)) => x == y,
        _ => (a.to_f64() - b.to_f64()).abs() <= tol * a.to_f64().max(b.to_f64()),
    }
}

/// Places β in (1, G], (G, β*), {β*} or (β*, ∞).
fn bucket(beta: &Beta, trace: &mut Vec<String>) -> Result<(Verdict, Option<Enclosure>)> {
    match beta {
        Beta::Exact(b) => {
            if *b <= Rational::one() {
                return Err(Error::Unsupported(format!("β = {} is not above 1", rational_text(b))));
            }
            if golden_cmp(b) != Ordering::Greater {
                trace.push(format!("β = {} ≤ G (β² ≤ β + 1)", rational_text(b)));
                return Ok((Verdict::FiniteNonEmpty, None));
            }
            trace.push(format!("β = {} > G", rational_text(b)));
            // β* is irrational, so a rational β separates from it after
            // finitely many refinements.
            let coarse = komornik_loreti(1e-10)?;
            let bf = rational_to_f64(b);
            if bf < coarse.lo - 1e-12 {
                trace.push(format!("β < β* ∈ [{}, {}]", coarse.lo, coarse.hi));
                return Ok((Verdict::InfiniteCountable, Some(coarse)));
            }
            if bf > coarse.hi + 1e-12 {
                trace.push(format!("β > β* ∈ [{}, {}]", coarse.lo, coarse.hi));
                return Ok((Verdict::PositiveHausdorffDim, Some(coarse)));
            }
            let mut exp = 12;
            while exp <= FINEST_BETA_STAR_EXPONENT {
                let width = num_traits::pow(rat(1, 10), exp as usize);
                let (lo, hi) = komornik_loreti_exact(&width)?;
                let enc = Enclosure::from_rationals(&lo, &hi);
                if *b < lo {
                    trace.push(format!("β < β* after refining to width 1e-{exp}"));
                    return Ok((Verdict::InfiniteCountable, Some(enc)));
                }
                if *b > hi {
                    trace.push(format!("β > β* after refining to width 1e-{exp}"));
                    return Ok((Verdict::PositiveHausdorffDim, Some(enc)));
                }
                exp *= 2;
            }
            Err(Error::PrecisionExhausted(format!(
                "β = {} is within 1e-{FINEST_BETA_STAR_EXPONENT} of β*",
                rational_text(b)
            )))
        }
        Beta::Approx(v) => {
            let (lo, hi) = (v * (1.0 - APPROX_BETA_SLACK), v * (1.0 + APPROX_BETA_SLACK));
            if hi <= 1.0 {
                return Err(Error::Unsupported(format!("β = {v} is not above 1")));
            }
            let g = crate::constants::golden_ratio(1e-15)?;
            if hi < g.lo {
                trace.push(format!("β ≈ {v} < G"));
                return Ok((Verdict::FiniteNonEmpty, None));
            }
            if lo <= g.hi {
                return Err(Error::PrecisionExhausted(format!(
                    "β ≈ {v} cannot be separated from G"
                )));
            }
            let kl = komornik_loreti(1e-12)?;
            if hi < kl.lo {
                trace.push(format!("G < β ≈ {v} < β*"));
                return Ok((Verdict::InfiniteCountable, Some(kl)));
            }
            if lo > kl.hi {
                trace.push(format!("β ≈ {v} > β*"));
                return Ok((Verdict::PositiveHausdorffDim, Some(kl)));
            }
            if (v - kl.midpoint()).abs() <= kl.width() + (hi - lo) {
                trace.push(format!("β ≈ {v} equals β* within the enclosure width"));
                return Ok((Verdict::UncountableZeroDim, Some(kl)));
            }
            Err(Error::PrecisionExhausted(format!(
                "β ≈ {v} straddles the β* enclosure"
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum InteriorKind {
    NonEmptyByTheorem,
    EmptyNullSet,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InteriorVerdict {
    pub verdict: InteriorKind,
    pub det_abs: f64,
    pub det_abs_exact: Option<String>,
    pub dimension: usize,
    pub threshold_hi: f64,
    pub threshold_lo: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Connectivity {
    PathConnected,
    Unknown,
}

/// `|det M| ≥ 2^{-1/d}` gives interior; `|det M| < 1/2` gives a null set.
pub fn interior_verdict(det_abs: &Modulus, dimension: usize) -> InteriorVerdict {
    let d = dimension.max(1);
    let half = rat(1, 2);
    let (above_hi, below_lo) = match det_abs {
        // det ≥ 2^{-1/d} ⟺ det^d ≥ 1/2 for det > 0.
        Modulus::Exact(det) => (num_traits::pow(det.clone(), d) >= half, *det < half),
        Modulus::Approx(det) => (det.powi(d as i32) >= 0.5, *det < 0.5),
    };
    let verdict = if above_hi {
        InteriorKind::NonEmptyByTheorem
    } else if below_lo {
        InteriorKind::EmptyNullSet
    } else {
        InteriorKind::Unknown
    };
    InteriorVerdict {
        verdict,
        det_abs: det_abs.to_f64(),
        det_abs_exact: det_abs.as_exact().map(rational_text),
        dimension: d,
        threshold_hi: 2f64.powf(-1.0 / d as f64),
        threshold_lo: 0.5,
    }
}

pub fn connectivity_verdict(det_abs: &Modulus) -> Connectivity {
    let connected = match det_abs {
        Modulus::Exact(det) => *det >= rat(1, 2),
        Modulus::Approx(det) => *det >= 0.5,
    };
    if connected {
        Connectivity::PathConnected
    } else {
        Connectivity::Unknown
    }
}

/// `|det|` from a spectrum or a matrix, for the two verdicts above.
pub fn det_of_spec(spec: &SpectralSpec) -> Modulus {
    spec.det_abs()
}

impl UniquenessClass {
    pub fn beta_is_above_one(&self) -> bool {
        match &self.beta {
            Some(Beta::Exact(b)) => b.is_positive() && *b > Rational::one(),
            Some(Beta::Approx(b)) => *b > 1.0,
            None => true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{BlockKind, Provenance, SpectralBlock};

    fn rot(r: Rational, p: u64, s: u64) -> SpectralBlock {
        SpectralBlock::rotation(r, Angle::rational_pi(p, s).unwrap()).unwrap()
    }

    fn real(n: i64, d: i64) -> SpectralBlock {
        SpectralBlock::real(rat(n, d)).unwrap()
    }

    fn classify(blocks: Vec<SpectralBlock>) -> UniquenessClass {
        classify_uniqueness(&SpectralSpec::exact(blocks).unwrap()).unwrap()
    }

    #[test]
    fn jordan_block_is_positive_dim() {
        let c = classify(vec![SpectralBlock::jordan(rat(1, 2), 2).unwrap()]);
        assert_eq!((c.verdict, c.rule), (Verdict::PositiveHausdorffDim, Rule::Jordan));
    }

    #[test]
    fn distinct_moduli() {
        let c = classify(vec![real(3, 5), real(4, 5)]);
        assert_eq!((c.verdict, c.rule), (Verdict::PositiveHausdorffDim, Rule::DistinctModuli));
    }

    #[test]
    fn sign_conflict_squares_beta() {
        let c = classify(vec![real(-9, 10), real(9, 10)]);
        assert_eq!(c.rule, Rule::RationalEqualModuli);
        assert_eq!(c.q, Some(1));
        assert!(c.sign_conflict);
        assert_eq!(c.beta, Some(Beta::Exact(rat(100, 81))));
        assert_eq!(c.verdict, Verdict::FiniteNonEmpty);

        let c = classify(vec![real(-7, 10), real(7, 10)]);
        assert_eq!(c.beta, Some(Beta::Exact(rat(100, 49))));
        // Independent evaluation: 1 / 0.49.
        assert!((c.beta.as_ref().unwrap().to_f64() - 1.0 / 0.49).abs() < 1e-12);
        assert_eq!(c.verdict, Verdict::PositiveHausdorffDim);
    }

    #[test]
    fn quarter_turn_rotation() {
        let c = classify(vec![rot(rat(19, 20), 1, 2)]);
        assert_eq!(c.q, Some(2));
        assert_eq!(c.signs, vec![-1]);
        assert!(!c.sign_conflict);
        assert_eq!(c.beta, Some(Beta::Exact(rat(400, 361))));
        assert_eq!(c.verdict, Verdict::FiniteNonEmpty);
    }

    #[test]
    fn two_rotations_conflict() {
        let c = classify(vec![rot(rat(19, 20), 1, 2), rot(rat(19, 20), 1, 3)]);
        assert_eq!(c.q, Some(6));
        assert_eq!(c.signs, vec![-1, 1]);
        assert_eq!(c.beta, Some(Beta::Exact(num_traits::pow(rat(20, 19), 12))));
        assert_eq!(c.verdict, Verdict::PositiveHausdorffDim);
    }

    #[test]
    fn all_four_buckets_in_one_dimension() {
        // β = 1/λ for a single positive real eigenvalue.
        assert_eq!(classify(vec![real(4, 5)]).verdict, Verdict::FiniteNonEmpty);
        assert_eq!(classify(vec![real(2, 3)]).verdict, Verdict::FiniteNonEmpty);
        assert_eq!(classify(vec![real(3, 5)]).verdict, Verdict::InfiniteCountable);
        assert_eq!(classify(vec![real(10, 17)]).verdict, Verdict::InfiniteCountable);
        assert_eq!(classify(vec![real(11, 20)]).verdict, Verdict::PositiveHausdorffDim);
    }

    #[test]
    fn beta_near_beta_star_is_resolved_by_refinement() {
        // 1/β* = 0.55952455849672652513...; both λ lie within 1e-16 of it.
        let lam = |n: i64| SpectralBlock::real(Rational::new(n.into(), 10_000_000_000_000_000i64.into())).unwrap();
        let above = classify(vec![lam(5_595_245_584_967_265)]);
        assert_eq!(above.verdict, Verdict::PositiveHausdorffDim);
        assert!(above.beta_star.unwrap().width() < 1e-15);
        let below = classify(vec![lam(5_595_245_584_967_266)]);
        assert_eq!(below.verdict, Verdict::InfiniteCountable);
    }

    #[test]
    fn heuristic_beta_at_beta_star() {
        let kl = komornik_loreti(1e-12).unwrap().midpoint();
        let spec = SpectralSpec::new(
            vec![SpectralBlock::new(BlockKind::RealPositive, Modulus::Approx(1.0 / kl)).unwrap()],
            Provenance::HeuristicFromMatrix { tolerance: 1e-9 },
        )
        .unwrap();
        let c = classify_uniqueness(&spec).unwrap();
        assert_eq!(c.verdict, Verdict::UncountableZeroDim);
        assert_eq!(c.confidence, Confidence::Heuristic);
    }

    #[test]
    fn irrational_angle() {
        let b = SpectralBlock::new(
            BlockKind::Rotation { angle: Angle::Irrational(1.0) },
            Modulus::Exact(rat(9, 10)),
        )
        .unwrap();
        let c = classify(vec![b]);
        assert_eq!((c.verdict, c.rule), (Verdict::PositiveHausdorffDim, Rule::IrrationalAngle));
    }

    #[test]
    fn interior_thresholds() {
        let v = |x: i64| interior_verdict(&Modulus::Exact(rat(x, 100)), 2).verdict;
        assert_eq!(v(85), InteriorKind::NonEmptyByTheorem);
        assert_eq!(v(60), InteriorKind::Unknown);
        assert_eq!(v(40), InteriorKind::EmptyNullSet);
        assert_eq!(connectivity_verdict(&Modulus::Exact(rat(1, 2))), Connectivity::PathConnected);
        assert_eq!(connectivity_verdict(&Modulus::Exact(rat(49, 100))), Connectivity::Unknown);
        let three = SpectralSpec::exact(vec![real(4, 5), real(-4, 5), SpectralBlock::jordan(rat(1, 2), 2).unwrap()])
            .unwrap();
        assert_eq!(three.det_abs(), Modulus::Exact(rat(16, 25) * rat(1, 4)));
        assert_eq!(
            connectivity_verdict(&Modulus::Exact(num_traits::pow(rat(4, 5), 3))),
            Connectivity::PathConnected
        );
    }

    #[test]
    fn exact_threshold_is_sharp() {
        // 2^{-1/2} is irrational; bracket it with rationals.
        let below = Modulus::Exact(rat(7071, 10000));
        let above = Modulus::Exact(rat(7072, 10000));
        assert_eq!(interior_verdict(&below, 2).verdict, InteriorKind::Unknown);
        assert_eq!(interior_verdict(&above, 2).verdict, InteriorKind::NonEmptyByTheorem);
        assert_eq!(interior_verdict(&Modulus::Exact(rat(1, 2)), 1).verdict, InteriorKind::NonEmptyByTheorem);
    }
}
