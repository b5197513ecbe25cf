//! Certified uniqueness of addresses: a point `π_M(a)` has exactly one
//! address, or a second address is exhibited.

mod digits;
mod search;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

pub use digits::{constrained_digits, reduce_subsequence, DigitConstraint};
pub use search::{SearchContext, ShiftOutcome, ShiftStats, Witness, WitnessKind};

use crate::attractor::Address;
use crate::error::{Error, Result};
use crate::scalar::{ArithmeticMode, Rational, Scalar};
use crate::spectral::RawSystem;
use search::{search_shift, AddressData};

pub const DEFAULT_DEPTH_CAP: usize = 64;
pub const DEFAULT_NODE_BUDGET: u64 = 10_000_000;
/// Longest word length `enumerate_unique_periodic` accepts.
pub const MAX_ENUMERATION_LENGTH: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CertifyOptions {
    pub depth_cap: usize,
    /// Nodes per start shift.
    pub node_budget: u64,
    /// Stop at the first shift that is not exhausted.
    pub stop_at_first_failure: bool,
    /// Search the start shifts in parallel. The result is identical.
    pub parallel: bool,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            depth_cap: DEFAULT_DEPTH_CAP,
            node_budget: DEFAULT_NODE_BUDGET,
            stop_at_first_failure: false,
            parallel: true,
        }
    }
}

impl CertifyOptions {
    pub fn with_depth_cap(depth_cap: usize) -> Self {
        Self {
            depth_cap,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificationStatus {
    UniqueCertified,
    CollisionFound,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certification {
    pub status: CertificationStatus,
    pub witness: Option<Witness>,
    pub depth_cap: usize,
    pub mode: ArithmeticMode,
    pub shifts: Vec<ShiftStats>,
}

impl Certification {
    pub fn is_unique(&self) -> bool {
        self.status == CertificationStatus::UniqueCertified
    }

    pub fn nodes(&self) -> u64 {
        self.shifts.iter().map(|s| s.nodes).sum()
    }
}

/// Decides whether `π_M(a)` has another address, for an eventually
/// periodic `a`. One search tree per start shift `m < ℓ + p`; a collision
/// in any tree gives `CollisionFound`, all trees exhausted gives
/// `UniqueCertified`, anything else `Undetermined`.
pub fn certify_address(sys: &RawSystem, a: &Address, opts: &CertifyOptions) -> Result<Certification> {
    match sys.mode() {
        ArithmeticMode::Exact => {
            let ctx = SearchContext::<Rational>::new(sys, opts.depth_cap)?;
            certify_with(&ctx, sys, a, opts)
        }
        ArithmeticMode::Float => {
            let ctx = SearchContext::<f64>::new(sys, opts.depth_cap)?;
            certify_with(&ctx, sys, a, opts)
        }
    }
}

/// [`certify_address`] with a prepared context, for repeated queries.
pub fn certify_with<S: Scalar>(
    ctx: &SearchContext<S>,
    sys: &RawSystem,
    a: &Address,
    opts: &CertifyOptions,
) -> Result<Certification> {
    if !a.is_periodic() {
        return Err(Error::NotPeriodic);
    }
    if opts.depth_cap != ctx.depth_cap() {
        return Err(Error::InvalidArgument(format!(
            "context built for depth cap {} used with {}",
            ctx.depth_cap(),
            opts.depth_cap
        )));
    }
    let data = AddressData::new(sys, ctx, a)?;
    let shifts = data.shift_count();
    if opts.depth_cap < shifts {
        return Err(Error::InvalidArgument(format!(
            "depth cap {} is below preperiod + period = {shifts}",
            opts.depth_cap
        )));
    }
    let stops = |s: &ShiftStats| {
        s.outcome == ShiftOutcome::Collision || (opts.stop_at_first_failure && s.outcome != ShiftOutcome::Exhausted)
    };
    let mut results: Vec<(ShiftStats, Option<Witness>)> = Vec::new();
    if opts.parallel {
        results = (0..shifts)
            .into_par_iter()
            .map(|m| search_shift(ctx, &data, m, opts.node_budget))
            .collect();
        if let Some(cut) = results.iter().position(|(s, _)| stops(s)) {
            results.truncate(cut + 1);
        }
    } else {
        for m in 0..shifts {
            let r = search_shift(ctx, &data, m, opts.node_budget);
            let stop = stops(&r.0);
            results.push(r);
            if stop {
                break;
            }
        }
    }
    let witness = results.iter().find_map(|(_, w)| w.clone());
    let status = if witness.is_some() {
        CertificationStatus::CollisionFound
    } else if results.len() == shifts && results.iter().all(|(s, _)| s.outcome == ShiftOutcome::Exhausted) {
        CertificationStatus::UniqueCertified
    } else {
        CertificationStatus::Undetermined
    };
    Ok(Certification {
        status,
        witness,
        depth_cap: opts.depth_cap,
        mode: S::MODE,
        shifts: results.into_iter().map(|(s, _)| s).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Enumeration {
    pub length: usize,
    /// `N_n`: words `w` of length `n` with `w^∞` certified unique.
    pub count: u64,
    /// The certified words, sorted (`-` before `+`).
    pub words: Vec<Vec<i8>>,
    /// Words neither certified nor refuted.
    pub undetermined: u64,
}

fn word_of(index: u64, n: usize) -> Vec<i8> {
    (0..n)
        .map(|k| if index >> (n - 1 - k) & 1 == 1 { 1 } else { -1 })
        .collect()
}

fn canonical_rotation(w: &[i8]) -> Vec<i8> {
    (0..w.len())
        .map(|r| {
            let mut v = w[r..].to_vec();
            v.extend_from_slice(&w[..r]);
            v
        })
        .min()
        .expect("non-empty word")
}

/// Counts the words `w ∈ {±1}^n` whose periodic address `w^∞` is
/// certified unique. Rotations of `w` share one certification.
pub fn enumerate_unique_periodic(sys: &RawSystem, n: usize, opts: &CertifyOptions) -> Result<Enumeration> {
    match sys.mode() {
        ArithmeticMode::Exact => {
            let ctx = SearchContext::<Rational>::new(sys, opts.depth_cap)?;
            enumerate_with(&ctx, sys, n, opts)
        }
        ArithmeticMode::Float => {
            let ctx = SearchContext::<f64>::new(sys, opts.depth_cap)?;
            enumerate_with(&ctx, sys, n, opts)
        }
    }
}

pub fn enumerate_with<S: Scalar>(
    ctx: &SearchContext<S>,
    sys: &RawSystem,
    n: usize,
    opts: &CertifyOptions,
) -> Result<Enumeration> {
    if n == 0 || n > MAX_ENUMERATION_LENGTH {
        return Err(Error::InvalidArgument(format!(
            "word length {n} outside 1..={MAX_ENUMERATION_LENGTH}"
        )));
    }
    let mut classes: BTreeMap<Vec<i8>, Vec<Vec<i8>>> = BTreeMap::new();
    for index in 0..1u64 << n {
        let w = word_of(index, n);
        classes.entry(canonical_rotation(&w)).or_default().push(w);
    }
    let quick = CertifyOptions {
        stop_at_first_failure: true,
        parallel: false,
        ..*opts
    };
    let reps: Vec<&Vec<i8>> = classes.keys().collect();
    let verdicts: Vec<CertificationStatus> = reps
        .par_iter()
        .map(|w| {
            let a = Address::purely_periodic(w.to_vec())?.normalized();
            certify_with(ctx, sys, &a, &quick).map(|c| c.status)
        })
        .collect::<Result<_>>()?;
    let mut words = Vec::new();
    let mut undetermined = 0;
    for ((_, members), status) in classes.iter().zip(&verdicts) {
        match status {
            CertificationStatus::UniqueCertified => words.extend(members.iter().cloned()),
            CertificationStatus::Undetermined => undetermined += members.len() as u64,
            CertificationStatus::CollisionFound => {}
        }
    }
    words.sort();
    Ok(Enumeration {
        length: n,
        count: words.len() as u64,
        words,
        undetermined,
    })
}

/// `N_n` for `n = 1..=n_max`, sharing one search context.
pub fn unique_counts(sys: &RawSystem, n_max: usize, opts: &CertifyOptions) -> Result<Vec<Enumeration>> {
    fn run<S: Scalar>(sys: &RawSystem, n_max: usize, opts: &CertifyOptions) -> Result<Vec<Enumeration>> {
        let ctx = SearchContext::<S>::new(sys, opts.depth_cap)?;
        (1..=n_max).map(|n| enumerate_with(&ctx, sys, n, opts)).collect()
    }
    match sys.mode() {
        ArithmeticMode::Exact => run::<Rational>(sys, n_max, opts),
        ArithmeticMode::Float => run::<f64>(sys, n_max, opts),
    }
}

/// Least-squares fit of `log2 N_n` against `n`. The slope is a growth rate
/// of certified unique periodic words, a symbolic-entropy proxy; it is not
/// a Hausdorff dimension.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyEstimate {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
    pub points: usize,
}

pub fn entropy_estimate(counts: &[(usize, u64)]) -> Result<EntropyEstimate> {
    let pts: Vec<(f64, f64)> = counts
        .iter()
        .filter(|(_, c)| *c > 0)
        .map(|&(n, c)| (n as f64, (c as f64).log2()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InvalidArgument(
            "entropy fit needs at least two non-zero counts".into(),
        ));
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("entropy fit needs two distinct lengths".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        / k)
        .sqrt();
    Ok(EntropyEstimate {
        slope,
        intercept,
        residual,
        points: pts.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attractor::exact_limit;
    use crate::scalar::rat;

    fn line(l: Rational) -> RawSystem {
        RawSystem::exact(vec![vec![l]], vec![rat(1, 1)]).unwrap()
    }

    fn addr(s: &str) -> Address {
        s.parse().unwrap()
    }

    #[test]
    fn contracting_line_is_all_unique() {
        let sys = line(rat(2, 5));
        for w in ["(+)", "(-+)", "+-(--+)", "(+-+--)"] {
            let c = certify_address(&sys, &addr(w), &CertifyOptions::default()).unwrap();
            assert_eq!(c.status, CertificationStatus::UniqueCertified, "{w}");
        }
    }

    #[test]
    fn overlapping_line_finds_collision() {
        let sys = line(rat(4, 5));
        let a = addr("(+-)");
        let c = certify_address(&sys, &a, &CertifyOptions::with_depth_cap(40)).unwrap();
        assert_ne!(c.status, CertificationStatus::UniqueCertified);
        if let Some(w) = &c.witness {
            assert_ne!(w.address.normalized(), a.normalized());
            assert_eq!(
                exact_limit::<Rational>(&sys, &w.address).unwrap(),
                exact_limit::<Rational>(&sys, &a).unwrap()
            );
        }
    }

    #[test]
    fn golden_line_collision_is_exact() {
        // λ = 1/2: +(-) and -(+) both project to 0.
        let sys = RawSystem::exact(vec![vec![rat(1, 2)]], vec![rat(1, 1)]).unwrap();
        let a = addr("+(-)");
        let c = certify_address(&sys, &a, &CertifyOptions::default()).unwrap();
        assert_eq!(c.status, CertificationStatus::CollisionFound);
        let w = c.witness.unwrap();
        assert_eq!(
            exact_limit::<Rational>(&sys, &w.address).unwrap(),
            exact_limit::<Rational>(&sys, &a).unwrap()
        );
    }

    #[test]
    fn extreme_point_of_positive_diagonal_is_unique() {
        let sys = RawSystem::exact(
            vec![vec![rat(3, 5), rat(0, 1)], vec![rat(0, 1), rat(4, 5)]],
            vec![rat(1, 1), rat(1, 1)],
        )
        .unwrap();
        let c = certify_address(&sys, &addr("(+)"), &CertifyOptions::default()).unwrap();
        assert!(c.is_unique());
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let sys = line(rat(11, 20));
        for w in ["(+-++-)", "(++-)", "-+(+--+)"] {
            let seq = CertifyOptions {
                parallel: false,
                ..CertifyOptions::default()
            };
            let a = certify_address(&sys, &addr(w), &seq).unwrap();
            let b = certify_address(&sys, &addr(w), &CertifyOptions::default()).unwrap();
            assert_eq!(a, b, "{w}");
        }
    }

    #[test]
    fn depth_cap_below_period_is_rejected() {
        let sys = line(rat(2, 5));
        assert!(certify_address(&sys, &addr("(+-+-+)"), &CertifyOptions::with_depth_cap(3)).is_err());
        assert!(certify_address(&sys, &addr("+-..."), &CertifyOptions::default()).is_err());
    }

    #[test]
    fn small_counts() {
        let opts = CertifyOptions::with_depth_cap(40);
        let counts = |l| unique_counts(&line(l), 6, &opts).unwrap().iter().map(|e| e.count).collect::<Vec<_>>();
        assert_eq!(counts(rat(4, 5)), vec![2; 6]);
        assert_eq!(counts(rat(2, 5)), vec![2, 4, 8, 16, 32, 64]);
        assert_eq!(counts(rat(11, 20)), vec![2, 4, 2, 8, 12, 16]);
    }

    #[test]
    fn entropy_of_full_shift_is_one() {
        let counts: Vec<(usize, u64)> = (1..10).map(|n| (n, 1u64 << n)).collect();
        let e = entropy_estimate(&counts).unwrap();
        assert!((e.slope - 1.0).abs() < 1e-12 && e.residual < 1e-12);
        assert!(entropy_estimate(&[(3, 4)]).is_err());
    }

    #[test]
    fn float_mode_agrees_on_easy_cases() {
        let sys = RawSystem::from_f64(vec![vec![0.4]], vec![1.0]).unwrap();
        let c = certify_address(&sys, &addr("(+--)"), &CertifyOptions::default()).unwrap();
        assert!(c.is_unique());
        assert_eq!(c.mode, ArithmeticMode::Float);
    }
}
