//! Strategies and property checks shared by the property and acceptance
//! targets.
#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed, TestCaseError, TestRunner};

use selfaffine::attractor::{chaos_game, cylinder_cloud, exact_limit, project_address, Address};
use selfaffine::linalg::{inf_norm_vec, sub_vec};
use selfaffine::scalar::rat;
use selfaffine::spectral::RawSystem;
use selfaffine::uniqueness::{certify_address, reduce_subsequence, CertificationStatus, CertifyOptions};
use selfaffine::Rational;

pub const SEED: u64 = 0x5e1f_aff1;

pub fn config(cases: u32) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(SEED),
        failure_persistence: None,
        ..Config::default()
    }
}

/// Runs `check` on `cases` inputs; the error text names the first
/// shrunk counterexample.
pub fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    check: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    TestRunner::new(config(cases))
        .run(&strategy, check)
        .map_err(|e| e.to_string())
}

pub fn digits(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<i8>> {
    prop::collection::vec(prop::bool::ANY.prop_map(|b| if b { 1i8 } else { -1 }), len)
}

pub fn address() -> impl Strategy<Value = Address> {
    (digits(0..4), digits(1..6)).prop_map(|(h, p)| Address::periodic(h, p).unwrap())
}

/// `k/20` with `0 < |k| ≤ max`.
fn contraction(max: i64) -> impl Strategy<Value = Rational> {
    (1i64..=max, prop::bool::ANY).prop_map(|(k, neg)| rat(if neg { -k } else { k }, 20))
}

pub fn line() -> impl Strategy<Value = RawSystem> {
    contraction(19).prop_map(|l| RawSystem::exact(vec![vec![l]], vec![rat(1, 1)]).unwrap())
}

/// Upper triangular with contracting diagonal; `u` need not be cyclic.
pub fn triangular() -> impl Strategy<Value = RawSystem> {
    (contraction(16), contraction(16), -3i64..=3, -2i64..=2, 1i64..=2).prop_map(|(a, c, b, u0, u1)| {
        RawSystem::exact(
            vec![vec![a, rat(b, 10)], vec![rat(0, 1), c]],
            vec![rat(u0, 1), rat(u1, 1)],
        )
        .unwrap()
    })
}

/// Quarter turn of modulus `k/20`, so `M² = -(k/20)² I`.
pub fn quarter_turn() -> impl Strategy<Value = RawSystem> {
    (1i64..20).prop_map(|k| {
        let r = rat(k, 20);
        RawSystem::exact(
            vec![vec![rat(0, 1), -r.clone()], vec![r, rat(0, 1)]],
            vec![rat(1, 1), rat(0, 1)],
        )
        .unwrap()
    })
}

pub fn system() -> impl Strategy<Value = RawSystem> {
    prop_oneof![line(), triangular(), quarter_turn()]
}

pub fn opts(depth_cap: usize) -> CertifyOptions {
    CertifyOptions {
        depth_cap,
        node_budget: 5_000,
        ..CertifyOptions::default()
    }
}

pub const SEARCH_CAP: usize = 16;

fn ok(cond: bool, what: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if cond {
        Ok(())
    } else {
        Err(TestCaseError::fail(what()))
    }
}

/// `π(a) = a_0 u + M π(σa)`, exactly, and the truncated form within `2T_n`.
pub fn shift_identity((sys, a, n): (RawSystem, Address, usize)) -> Result<(), TestCaseError> {
    let p: Vec<Rational> = exact_limit(&sys, &a).unwrap();
    let q: Vec<Rational> = exact_limit(&sys, &a.shift(1)).unwrap();
    let mq = sys.matrix().mul_vec(&q);
    let a0 = rat(a.digit(0).unwrap() as i64, 1);
    let rhs: Vec<Rational> = sys.u().iter().zip(&mq).map(|(u, x)| a0.clone() * u + x).collect();
    ok(p == rhs, || format!("exact shift identity fails for {a}"))?;

    let (head, t) = project_address::<Rational>(&sys, &a, n + 1).unwrap();
    let (shifted, _) = project_address::<Rational>(&sys, &a.shift(1), n).unwrap();
    let ms = sys.matrix().mul_vec(&shifted);
    let rebuilt: Vec<Rational> = sys.u().iter().zip(&ms).map(|(u, x)| a0.clone() * u + x).collect();
    let residual = inf_norm_vec(&sub_vec(&head, &rebuilt));
    ok(residual <= t.clone() + t, || format!("truncated residual too large for {a}"))
}

pub fn tail_bound((sys, a, n): (RawSystem, Address, usize)) -> Result<(), TestCaseError> {
    let exact: Vec<Rational> = exact_limit(&sys, &a).unwrap();
    let (partial, t) = project_address::<Rational>(&sys, &a, n).unwrap();
    ok(inf_norm_vec(&sub_vec(&exact, &partial)) <= t, || format!("T_{n} violated for {a}"))
}

/// Chaos-game samples lie in the union of the depth-`n` cylinder balls.
pub fn cylinder_covering((sys, seed, depth): (RawSystem, u64, usize)) -> Result<(), TestCaseError> {
    let cloud = cylinder_cloud::<f64>(&sys, depth).unwrap();
    let r = *cloud.radius();
    for x in chaos_game(&sys, 64, seed) {
        let best = cloud
            .centers()
            .map(|c| x.iter().zip(c).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(f64::INFINITY, f64::min);
        ok(best <= r * (1.0 + 1e-9) + 1e-12, || {
            format!("sample {x:?} is {best} from every centre, radius {r}")
        })?;
    }
    Ok(())
}

pub fn collisions_are_genuine((sys, a): (RawSystem, Address)) -> Result<(), TestCaseError> {
    let c = certify_address(&sys, &a, &opts(SEARCH_CAP)).unwrap();
    let Some(w) = c.witness else {
        return Ok(());
    };
    ok(c.status == CertificationStatus::CollisionFound && !w.approximate, || "bad witness status".into())?;
    ok(w.address.normalized() != a.normalized(), || "witness equals the address".into())?;
    let p: Vec<Rational> = exact_limit(&sys, &a).unwrap();
    let q: Vec<Rational> = exact_limit(&sys, &w.address).unwrap();
    ok(p == q, || format!("witness {} does not meet {a}", w.address))
}

/// No address that flips digits of a certified `a` inside the first `D`
/// positions and agrees afterwards hits the same point.
pub fn certified_has_no_nearby_twin(
    (sys, a, flips): (RawSystem, Address, Vec<Vec<usize>>),
) -> Result<(), TestCaseError> {
    let c = certify_address(&sys, &a, &opts(SEARCH_CAP)).unwrap();
    if !c.is_unique() {
        return Ok(());
    }
    let p: Vec<Rational> = exact_limit(&sys, &a).unwrap();
    let period = a.period().unwrap().to_vec();
    let mut head = a.prefix(SEARCH_CAP + a.preperiod()).unwrap();
    let base = head.clone();
    for positions in flips {
        head.copy_from_slice(&base);
        for &i in &positions {
            head[i % SEARCH_CAP] *= -1;
        }
        if head == base {
            continue;
        }
        let tail_start = head.len() - a.preperiod();
        let rot: Vec<i8> = (0..period.len()).map(|k| period[(tail_start + k) % period.len()]).collect();
        let b = Address::periodic(head.clone(), rot).unwrap();
        let q: Vec<Rational> = exact_limit(&sys, &b).unwrap();
        ok(p != q, || format!("{a} certified but {b} hits the same point"))?;
    }
    Ok(())
}

pub fn sign_flip((sys, a): (RawSystem, Address)) -> Result<(), TestCaseError> {
    let c = certify_address(&sys, &a, &opts(SEARCH_CAP)).unwrap();
    let n = certify_address(&sys, &a.negate(), &opts(SEARCH_CAP)).unwrap();
    ok(c.status == n.status && c.nodes() == n.nodes(), || {
        format!("{a}: {:?} vs {:?}", c.status, n.status)
    })
}

pub fn deeper_cap((sys, a, extra): (RawSystem, Address, usize)) -> Result<(), TestCaseError> {
    let c = certify_address(&sys, &a, &opts(SEARCH_CAP)).unwrap();
    if !c.is_unique() {
        return Ok(());
    }
    let deeper = certify_address(&sys, &a, &opts(SEARCH_CAP + extra)).unwrap();
    ok(deeper.is_unique(), || format!("{a} lost its certificate at cap {}", SEARCH_CAP + extra))
}

pub fn block_lift((m1, m2, a): (RawSystem, RawSystem, Address)) -> Result<(), TestCaseError> {
    if !certify_address(&m1, &a, &opts(SEARCH_CAP)).unwrap().is_unique() {
        return Ok(());
    }
    let sum = m1.direct_sum(&m2).unwrap();
    let c = certify_address(&sum, &a, &opts(SEARCH_CAP)).unwrap();
    ok(c.is_unique(), || format!("{a}: {:?} for the direct sum", c.status))
}

pub fn subsequence_reduction((sys, a, q): (RawSystem, Address, usize)) -> Result<(), TestCaseError> {
    let d = 2 * SEARCH_CAP;
    if !certify_address(&sys, &a, &opts(d)).unwrap().is_unique() {
        return Ok(());
    }
    let power = sys.power(q).unwrap();
    for j in 0..q {
        let r = reduce_subsequence(&a, q, j).unwrap();
        let c = certify_address(&power, &r, &opts(d / q)).unwrap();
        ok(c.is_unique(), || format!("{a} reduced by q={q}, j={j} to {r}: {:?}", c.status))?;
    }
    Ok(())
}
