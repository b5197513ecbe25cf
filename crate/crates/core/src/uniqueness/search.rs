//! Branch-and-bound over competing addresses.
//!
//! For a start shift `m`, a second address `b` of `π(σ^m a)` with
//! `b_m = -a_m` exists iff the points `Y_j = π(σ^{m+j} b)` stay in `A_M`
//! for all `j`, where `Y_0 = π(σ^m a)` and `Y_{j+1} = M^{-1}(Y_j - b_{m+j} u)`.
//! Nodes are pruned when `Y_j` leaves a polyhedral hull of `A_M`, or when
//! the difference `P_j = Σ_{k<j} (a_{m+k} - b_{m+k}) M^k u` violates
//! `‖P_j‖∞ ≤ 2T_j` on some invariant coordinate block.

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::attractor::{exact_limit, Address, TailBounds, NORM_CERTIFICATE_CAP};
use crate::error::{Error, Result};
use crate::linalg::{inf_norm_vec, Matrix};
use crate::scalar::{f64_to_rational, Scalar, FLOAT_GUARD};
use crate::spectral::RawSystem;

/// Terms summed exactly in a truncated support function.
const SUPPORT_TERMS: usize = 64;
/// Largest `q` tried when looking for `vᵀM^q = μvᵀ`.
const MAX_EIGEN_POWER: usize = 24;
/// Cap on remembered dead states per tree.
const DEAD_MEMO_CAP: usize = 2_000_000;

/// Direction `v` with an upper bound `h ≥ max_{x∈A} v·x`.
#[derive(Debug, Clone)]
struct Facet<S> {
    /// Sparse `v`: (coordinate, ±1).
    v: Vec<(usize, i8)>,
    h: S,
    h_f64: f64,
}

/// Everything about `(M, u)` the search needs, independent of the address.
#[derive(Debug, Clone)]
pub struct SearchContext<S: Scalar> {
    d: usize,
    depth_cap: usize,
    matrix: Matrix<S>,
    m_inv: Matrix<S>,
    u: Vec<S>,
    /// `M^k u` for `k ≤ depth_cap`.
    orbit: Vec<Vec<S>>,
    blocks: Vec<Vec<usize>>,
    /// `2·T_c(j)` per block, `j ≤ depth_cap`.
    twice_tails: Vec<Vec<S>>,
    facets: Vec<Facet<S>>,
}

fn signed_dot<S: Scalar>(v: &[(usize, i8)], x: &[S]) -> S {
    v.iter().fold(S::zero(), |acc, &(i, s)| {
        if s > 0 {
            acc + x[i].clone()
        } else {
            acc - x[i].clone()
        }
    })
}

/// Connected components of the non-zero pattern of `M`; each spans an
/// `M`-invariant coordinate subspace.
pub(crate) fn coordinate_blocks<S: Scalar>(m: &Matrix<S>) -> Vec<Vec<usize>> {
    let d = m.rows();
    let mut label: Vec<usize> = (0..d).collect();
    fn find(label: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while label[r] != r {
            r = label[r];
        }
        label[i] = r;
        r
    }
    for i in 0..d {
        for j in 0..d {
            if i != j && !m[(i, j)].is_zero() {
                let (a, b) = (find(&mut label, i), find(&mut label, j));
                if a != b {
                    label[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut roots: Vec<usize> = Vec::new();
    for i in 0..d {
        let r = find(&mut label, i);
        match roots.iter().position(|&x| x == r) {
            Some(k) => blocks[k].push(i),
            None => {
                roots.push(r);
                blocks.push(vec![i]);
            }
        }
    }
    blocks
}

fn submatrix<S: Scalar>(m: &Matrix<S>, idx: &[usize]) -> Matrix<S> {
    let mut out = Matrix::zeros(idx.len(), idx.len());
    for (a, &i) in idx.iter().enumerate() {
        for (b, &j) in idx.iter().enumerate() {
            out[(a, b)] = m[(i, j)].clone();
        }
    }
    out
}

impl<S: Scalar> SearchContext<S> {
    pub fn new(sys: &RawSystem, depth_cap: usize) -> Result<Self> {
        let d = sys.dimension();
        let matrix = sys.matrix_as::<S>();
        let u = sys.u_as::<S>();
        let m_inv = sys.matrix().inverse().map(|inv| inv.map(S::from_rational))?;
        let horizon = depth_cap;
        let mut orbit = Vec::with_capacity(horizon + 1);
        let mut v = u.clone();
        for _ in 0..=horizon {
            let next = matrix.mul_vec(&v);
            orbit.push(v);
            v = next;
        }
        let blocks = coordinate_blocks(&matrix);
        let matrix_f = sys.matrix_as::<f64>();
        let u_f = sys.u_as::<f64>();
        let mut twice_tails = Vec::with_capacity(blocks.len());
        let mut far_tails = Vec::with_capacity(blocks.len());
        for idx in &blocks {
            let ub: Vec<S> = idx.iter().map(|&i| u[i].clone()).collect();
            let mut t = TailBounds::new(submatrix(&matrix, idx), ub, NORM_CERTIFICATE_CAP)?;
            twice_tails.push(
                (0..=depth_cap)
                    .map(|j| {
                        let x = t.bound(j);
                        x.clone() + x
                    })
                    .collect::<Vec<S>>(),
            );
            let ub: Vec<f64> = idx.iter().map(|&i| u_f[i]).collect();
            let mut tf = TailBounds::new(submatrix(&matrix_f, idx), ub, NORM_CERTIFICATE_CAP)?;
            far_tails.push(tf.bound(SUPPORT_TERMS));
        }
        let mut orbit_f = Vec::with_capacity(SUPPORT_TERMS);
        let mut vf = u_f;
        for _ in 0..SUPPORT_TERMS {
            let next = matrix_f.mul_vec(&vf);
            orbit_f.push(vf);
            vf = next;
        }

        let block_of: Vec<usize> = {
            let mut b = vec![0; d];
            for (k, idx) in blocks.iter().enumerate() {
                for &i in idx {
                    b[i] = k;
                }
            }
            b
        };
        let mut dirs: Vec<Vec<(usize, i8)>> = (0..d).map(|i| vec![(i, 1)]).collect();
        for i in 0..d {
            for j in i + 1..d {
                dirs.push(vec![(i, 1), (j, 1)]);
                dirs.push(vec![(i, 1), (j, -1)]);
            }
        }
        let facets = dirs
            .into_iter()
            .map(|v| {
                let h = support(&v, &matrix, &orbit, &orbit_f, &far_tails, &block_of)?;
                Ok(Facet {
                    h_f64: h.to_f64(),
                    v,
                    h,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            d,
            depth_cap,
            matrix,
            m_inv,
            u,
            orbit,
            blocks,
            twice_tails,
            facets,
        })
    }

    pub fn depth_cap(&self) -> usize {
        self.depth_cap
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Whether `y` passes every hull test, i.e. may lie in `A_M`.
    pub fn in_hull(&self, y: &[S]) -> bool {
        self.facets
            .iter()
            .all(|f| !signed_dot(&f.v, y).abs().definitely_exceeds(&f.h))
    }

    fn bound_ok(&self, p: &[S], j: usize) -> bool {
        self.blocks.iter().zip(&self.twice_tails).all(|(idx, t)| {
            let norm = idx.iter().fold(S::zero(), |acc, &i| {
                let a = p[i].abs();
                if a > acc {
                    a
                } else {
                    acc
                }
            });
            !norm.definitely_exceeds(&t[j])
        })
    }

    /// Smaller is more central; used to order children.
    fn centrality(&self, y: &[S]) -> f64 {
        let yf: Vec<f64> = y.iter().map(Scalar::to_f64).collect();
        self.facets
            .iter()
            .map(|f| signed_dot(&f.v, &yf).abs() / f.h_f64.max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    }
}

/// Least `q ≤ MAX_EIGEN_POWER` with `vᵀM^q ≈ μvᵀ` in floating point.
fn float_eigen_power<S: Scalar>(v: &[(usize, i8)], matrix: &Matrix<S>) -> Option<usize> {
    let d = matrix.rows();
    let mut dense = vec![0.0; d];
    for &(i, s) in v {
        dense[i] = s as f64;
    }
    let (i0, s0) = v[0];
    let mut w = dense.clone();
    for q in 1..=MAX_EIGEN_POWER {
        w = (0..d)
            .map(|j| (0..d).map(|i| w[i] * matrix[(i, j)].to_f64()).sum())
            .collect();
        let mu = w[i0] / s0 as f64;
        let scale = w.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if (0..d).all(|j| (w[j] - mu * dense[j]).abs() <= 1e-9 * scale) {
            return Some(q);
        }
    }
    None
}

/// `max_{x∈A} v·x = Σ_k |v·M^k u|`: exact when `vᵀM^q = μvᵀ` for a small
/// `q` (exact mode), otherwise `SUPPORT_TERMS` float terms plus a
/// block-wise tail, rounded outward.
fn support<S: Scalar>(
    v: &[(usize, i8)],
    matrix: &Matrix<S>,
    orbit: &[Vec<S>],
    orbit_f: &[Vec<f64>],
    far_tails: &[f64],
    block_of: &[usize],
) -> Result<S> {
    let d = matrix.rows();
    if S::is_exact() {
        if let Some(q) = float_eigen_power(v, matrix) {
            let mut dense = vec![S::zero(); d];
            for &(i, s) in v {
                dense[i] = S::from_i64(s as i64);
            }
            let (i0, s0) = v[0];
            let mut w = dense.clone();
            for _ in 0..q {
                w = (0..d)
                    .map(|j| (0..d).fold(S::zero(), |acc, i| acc + w[i].clone() * matrix[(i, j)].clone()))
                    .collect();
            }
            let mu = w[i0].clone() / S::from_i64(s0 as i64);
            if (0..d).all(|j| w[j] == mu.clone() * dense[j].clone()) {
                let mut x = orbit[0].clone();
                let mut head = S::zero();
                for _ in 0..q {
                    head = head + signed_dot(v, &x).abs();
                    x = matrix.mul_vec(&x);
                }
                return Ok(head / (S::one() - mu.abs()));
            }
        }
    }
    let head: f64 = orbit_f.iter().map(|x| signed_dot(v, x).abs()).sum();
    let mut per_block = vec![0.0; far_tails.len()];
    for &(i, _) in v {
        per_block[block_of[i]] += 1.0;
    }
    let tail: f64 = per_block.iter().zip(far_tails).map(|(n, t)| n * t).sum();
    let h = (head + tail).guard_up();
    Ok(S::from_rational(&f64_to_rational(h)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    /// `b` agrees with `a` from some point on.
    Finite,
    /// `b` ends in a cycle found by a repeated search state.
    Periodic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    /// The second address of `π(a)`.
    pub address: Address,
    pub shift: usize,
    pub kind: WitnessKind,
    /// Float mode: the match holds only to rounding tolerance.
    pub approximate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftOutcome {
    Exhausted,
    Collision,
    DepthCap,
    NodeBudget,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftStats {
    pub shift: usize,
    pub outcome: ShiftOutcome,
    pub nodes: u64,
    pub max_depth: usize,
    pub pruned_bound: u64,
    pub pruned_hull: u64,
    pub memo_hits: u64,
}

/// Per-address data: digits, phases and the points `π(σ^i a)`.
pub(crate) struct AddressData<S: Scalar> {
    head_len: usize,
    period: usize,
    digits: Vec<i8>,
    /// `π(σ^i a)` indexed by phase.
    points: Vec<Vec<S>>,
    address: Address,
}

impl<S: Scalar> AddressData<S> {
    pub(crate) fn new(sys: &RawSystem, ctx: &SearchContext<S>, a: &Address) -> Result<Self> {
        let period = a.period().ok_or(Error::NotPeriodic)?.len();
        let head_len = a.preperiod();
        let phases = head_len + period;
        let digits = a.prefix(phases)?;
        let mut points = vec![Vec::new(); phases];
        points[head_len] = exact_limit::<S>(sys, &a.shift(head_len))?;
        for i in head_len + 1..phases {
            let prev = &points[i - 1];
            let y: Vec<S> = (0..ctx.d)
                .map(|k| prev[k].clone() - S::from_i64(digits[i - 1] as i64) * ctx.u[k].clone())
                .collect();
            points[i] = ctx.m_inv.mul_vec(&y);
        }
        for i in (0..head_len).rev() {
            let next = ctx.matrix.mul_vec(&points[i + 1]);
            points[i] = (0..ctx.d)
                .map(|k| S::from_i64(digits[i] as i64) * ctx.u[k].clone() + next[k].clone())
                .collect();
        }
        Ok(Self {
            head_len,
            period,
            digits,
            points,
            address: a.clone(),
        })
    }

    pub(crate) fn shift_count(&self) -> usize {
        self.head_len + self.period
    }

    fn phase(&self, i: usize) -> usize {
        if i < self.head_len {
            i
        } else {
            self.head_len + (i - self.head_len) % self.period
        }
    }
}

pub(crate) enum Outcome {
    Dead,
    Alive,
    Budget,
    Collision(Witness),
}

type StateKey<S> = (usize, Vec<<S as Scalar>::Key>);

struct Tree<'a, S: Scalar> {
    ctx: &'a SearchContext<S>,
    addr: &'a AddressData<S>,
    shift: usize,
    budget: u64,
    /// `b_{m+k}` along the current path.
    path: Vec<i8>,
    on_path: HashMap<StateKey<S>, usize>,
    dead: HashSet<StateKey<S>>,
    stats: ShiftStats,
}

impl<S: Scalar> Tree<'_, S> {
    fn witness_finite(&self, approximate: bool) -> Witness {
        let m = self.shift;
        let j = self.path.len();
        let mut head = self.addr.address.prefix(m).expect("periodic");
        head.extend_from_slice(&self.path);
        let rest = self.addr.address.shift(m + j);
        head.extend_from_slice(rest.head());
        let period = rest.period().expect("periodic").to_vec();
        Witness {
            address: Address::periodic(head, period).expect("digits are ±1").normalized(),
            shift: m,
            kind: WitnessKind::Finite,
            approximate,
        }
    }

    fn witness_cycle(&self, from: usize) -> Witness {
        let m = self.shift;
        let mut head = self.addr.address.prefix(m).expect("periodic");
        head.extend_from_slice(&self.path[..from]);
        let period = self.path[from..].to_vec();
        Witness {
            address: Address::periodic(head, period).expect("digits are ±1").normalized(),
            shift: m,
            kind: WitnessKind::Periodic,
            approximate: false,
        }
    }

    fn visit(&mut self, j: usize, y: Vec<S>, p: Vec<S>) -> Outcome {
        self.stats.nodes += 1;
        self.stats.max_depth = self.stats.max_depth.max(j);
        if self.stats.nodes > self.budget {
            return Outcome::Budget;
        }
        let i = self.shift + j;
        let phase = self.addr.phase(i);
        if j > 0 {
            let target = &self.addr.points[phase];
            if S::is_exact() {
                if y == *target {
                    return Outcome::Collision(self.witness_finite(false));
                }
            } else {
                let diff: Vec<S> = y.iter().zip(target).map(|(a, b)| a.clone() - b.clone()).collect();
                let scale = 1.0 + inf_norm_vec(target).to_f64();
                if inf_norm_vec(&diff).to_f64() <= FLOAT_GUARD * scale {
                    return Outcome::Collision(self.witness_finite(true));
                }
            }
        }
        let key: StateKey<S> = (phase, y.iter().map(Scalar::key).collect());
        if S::is_exact() {
            if let Some(&from) = self.on_path.get(&key) {
                return Outcome::Collision(self.witness_cycle(from));
            }
        }
        if self.dead.contains(&key) {
            self.stats.memo_hits += 1;
            return Outcome::Dead;
        }
        if j >= self.ctx.depth_cap {
            return Outcome::Alive;
        }

        let a_i = self.addr.digits[phase];
        let choices: Vec<i8> = if j == 0 { vec![-a_i] } else { vec![a_i, -a_i] };
        let mut children = Vec::with_capacity(2);
        for b in choices {
            let bs = S::from_i64(b as i64);
            let shifted: Vec<S> = y
                .iter()
                .zip(&self.ctx.u)
                .map(|(yk, uk)| yk.clone() - bs.clone() * uk.clone())
                .collect();
            let y_next = self.ctx.m_inv.mul_vec(&shifted);
            let p_next = if b == a_i {
                p.clone()
            } else {
                let c = S::from_i64((a_i - b) as i64);
                p.iter()
                    .zip(&self.ctx.orbit[j])
                    .map(|(pk, ok)| pk.clone() + c.clone() * ok.clone())
                    .collect()
            };
            if !self.ctx.bound_ok(&p_next, j + 1) {
                self.stats.pruned_bound += 1;
                continue;
            }
            if !self.ctx.in_hull(&y_next) {
                self.stats.pruned_hull += 1;
                continue;
            }
            let score = self.ctx.centrality(&y_next);
            children.push((score, b != a_i, b, y_next, p_next));
        }
        // Most central first; the agreeing digit wins ties.
        children.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));

        if S::is_exact() {
            self.on_path.insert(key.clone(), j);
        }
        let mut result = Outcome::Dead;
        for (_, _, b, y_next, p_next) in children {
            self.path.push(b);
            let r = self.visit(j + 1, y_next, p_next);
            self.path.pop();
            match r {
                Outcome::Dead => {}
                other => {
                    result = other;
                    break;
                }
            }
        }
        if S::is_exact() {
            self.on_path.remove(&key);
        }
        if matches!(result, Outcome::Dead) && j > 0 && self.dead.len() < DEAD_MEMO_CAP {
            self.dead.insert(key);
        }
        result
    }
}

/// Searches the tree of start shift `m`.
pub(crate) fn search_shift<S: Scalar>(
    ctx: &SearchContext<S>,
    addr: &AddressData<S>,
    shift: usize,
    budget: u64,
) -> (ShiftStats, Option<Witness>) {
    let mut tree = Tree {
        ctx,
        addr,
        shift,
        budget,
        path: Vec::new(),
        on_path: HashMap::new(),
        dead: HashSet::new(),
        stats: ShiftStats {
            shift,
            outcome: ShiftOutcome::Exhausted,
            nodes: 0,
            max_depth: 0,
            pruned_bound: 0,
            pruned_hull: 0,
            memo_hits: 0,
        },
    };
    let root = addr.points[addr.phase(shift)].clone();
    let p0 = vec![S::zero(); ctx.d];
    let outcome = tree.visit(0, root, p0);
    let mut stats = tree.stats;
    let witness = match outcome {
        Outcome::Dead => None,
        Outcome::Alive => {
            stats.outcome = ShiftOutcome::DepthCap;
            None
        }
        Outcome::Budget => {
            stats.outcome = ShiftOutcome::NodeBudget;
            None
        }
        Outcome::Collision(w) => {
            stats.outcome = ShiftOutcome::Collision;
            Some(w)
        }
    };
    (stats, witness)
}
