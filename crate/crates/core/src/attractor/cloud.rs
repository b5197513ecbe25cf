//! Point clouds: chaos game, cylinder centres, and the Minkowski regrouping
//! of the centres by residue class of the digit index.

use std::cmp::Ordering;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::TailBounds;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{ArithmeticMode, Scalar};
use crate::spectral::RawSystem;

pub const MAX_CLOUD_DEPTH: usize = 24;

const BURN_IN: usize = 64;

/// Samples of `A_M` from the random iteration `x ← Mx ± u`, started at the
/// origin and deterministic in `seed`.
pub fn chaos_game(sys: &RawSystem, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let m = sys.matrix_as::<f64>();
    let u = sys.u_as::<f64>();
    let d = sys.dimension();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![0.0; d];
    let mut out = Vec::with_capacity(count);
    for step in 0..BURN_IN + count {
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let mx = m.mul_vec(&x);
        for i in 0..d {
            x[i] = mx[i] + sign * u[i];
        }
        if step >= BURN_IN {
            out.push(x.clone());
        }
    }
    out
}

/// The `2^n` partial sums `c_w = Σ_{k<n} w_k M^k u` with the shared radius
/// `T_n`. Word `i` has `w_0` as its most significant bit, `0 ↦ -1` and
/// `1 ↦ +1`, so the centres are listed in lexicographic order of `w`.
#[derive(Debug, Clone)]
pub struct CylinderCloud<S: Scalar> {
    depth: usize,
    dimension: usize,
    coords: Vec<S>,
    radius: S,
}

impl<S: Scalar> CylinderCloud<S> {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dimension
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn radius(&self) -> &S {
        &self.radius
    }

    pub fn center(&self, i: usize) -> &[S] {
        &self.coords[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn centers(&self) -> impl Iterator<Item = &[S]> {
        self.coords.chunks(self.dimension)
    }

    pub fn word(&self, i: usize) -> Vec<i8> {
        (0..self.depth)
            .map(|k| if (i >> (self.depth - 1 - k)) & 1 == 1 { 1 } else { -1 })
            .collect()
    }
}

/// Centres of all words of length `depth` for digit sets `{lo, hi}` applied
/// to the vectors `v_0, ..., v_{n-1}`, in lexicographic order.
fn partial_sums<S: Scalar>(vectors: &[Vec<S>], lo: &S, hi: &S, d: usize) -> Vec<S> {
    let n = vectors.len();
    // Split on the first few digits for parallelism; each chunk is filled in
    // the same order as a sequential sweep.
    let split = n.min(6);
    let chunks: Vec<Vec<S>> = (0..1usize << split)
        .into_par_iter()
        .map(|top| {
            let mut base = vec![S::zero(); d];
            for k in 0..split {
                let digit = if (top >> (split - 1 - k)) & 1 == 1 { hi } else { lo };
                for i in 0..d {
                    base[i] = base[i].clone() + digit.clone() * vectors[k][i].clone();
                }
            }
            let mut level = base;
            for vec_k in &vectors[split..] {
                let count = level.len() / d;
                let mut next = Vec::with_capacity(level.len() * 2);
                for j in 0..count {
                    let c = &level[j * d..(j + 1) * d];
                    for digit in [lo, hi] {
                        for i in 0..d {
                            next.push(c[i].clone() + digit.clone() * vec_k[i].clone());
                        }
                    }
                }
                level = next;
            }
            level
        })
        .collect();
    chunks.into_iter().flatten().collect()
}

fn orbit<S: Scalar>(m: &Matrix<S>, u: &[S], n: usize) -> Vec<Vec<S>> {
    let mut out = Vec::with_capacity(n);
    let mut v = u.to_vec();
    for _ in 0..n {
        let next = m.mul_vec(&v);
        out.push(v);
        v = next;
    }
    out
}

pub fn cylinder_cloud<S: Scalar>(sys: &RawSystem, depth: usize) -> Result<CylinderCloud<S>> {
    if depth > MAX_CLOUD_DEPTH {
        return Err(Error::DepthCap {
            depth,
            cap: MAX_CLOUD_DEPTH,
        });
    }
    let d = sys.dimension();
    let m = sys.matrix_as::<S>();
    let vectors = orbit(&m, &sys.u_as::<S>(), depth);
    let coords = partial_sums(&vectors, &S::from_i64(-1), &S::one(), d);
    let radius = TailBounds::<S>::for_system(sys)?.bound(depth);
    Ok(CylinderCloud {
        depth,
        dimension: d,
        coords,
        radius,
    })
}

/// Centres `Σ_{k<n} b_k M^k u` over digits `b_k ∈ {0, 1}`.
pub fn zero_one_centers<S: Scalar>(m: &Matrix<S>, u: &[S], n: usize) -> Vec<Vec<S>> {
    let d = u.len();
    partial_sums(&orbit(m, u, n), &S::zero(), &S::one(), d)
        .chunks(d)
        .map(<[S]>::to_vec)
        .collect()
}

/// `C + M·C + ... + M^{d-1}·C` where `C` are the depth-`n` zero-one centres
/// of `{M^d v + u}`.
pub fn minkowski_sum_centers<S: Scalar>(m: &Matrix<S>, u: &[S], groups: usize, n: usize) -> Vec<Vec<S>> {
    let base = zero_one_centers(&m.pow(groups), u, n);
    let mut sum: Vec<Vec<S>> = vec![vec![S::zero(); u.len()]];
    let mut mj = Matrix::<S>::identity(u.len());
    for _ in 0..groups {
        let image: Vec<Vec<S>> = base.iter().map(|c| mj.mul_vec(c)).collect();
        sum = sum
            .iter()
            .flat_map(|s| image.iter().map(move |c| crate::linalg::add_vec(s, c)))
            .collect();
        mj = mj.mul(m);
    }
    sum
}

fn lex_cmp<S: Scalar>(a: &[S], b: &[S]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y).unwrap_or(Ordering::Equal) {
            Ordering::Equal => {}
            other => return other,
        }
    }
    Ordering::Equal
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinkowskiReport {
    pub groups: usize,
    pub depth: usize,
    pub count: usize,
    pub equal: bool,
    /// Exact comparison (rational mode) rather than a `1e-9` tolerance.
    pub exact: bool,
    /// Index into the sorted lists of the first differing pair.
    pub first_mismatch: Option<usize>,
    pub max_deviation: f64,
}

/// Compares two point multisets after sorting each lexicographically;
/// `tolerance` is an absolute per-coordinate bound, `0` meaning exact.
pub fn compare_multisets<S: Scalar>(a: &[Vec<S>], b: &[Vec<S>], tolerance: f64) -> (bool, Option<usize>, f64) {
    if a.len() != b.len() {
        return (false, Some(a.len().min(b.len())), f64::INFINITY);
    }
    let mut a: Vec<&Vec<S>> = a.iter().collect();
    let mut b: Vec<&Vec<S>> = b.iter().collect();
    a.sort_by(|x, y| lex_cmp(x, y));
    b.sort_by(|x, y| lex_cmp(x, y));
    let mut first = None;
    let mut worst = 0.0_f64;
    for (i, (x, y)) in a.iter().zip(&b).enumerate() {
        let dev = x
            .iter()
            .zip(y.iter())
            .map(|(p, q)| (p.clone() - q.clone()).abs().to_f64())
            .fold(0.0, f64::max);
        let same = if tolerance == 0.0 { x == y } else { dev <= tolerance };
        worst = worst.max(dev);
        if !same && first.is_none() {
            first = Some(i);
        }
    }
    (first.is_none(), first, worst)
}

/// Checks that the depth-`n·groups` zero-one centres of `A_M` equal, as a
/// multiset, the Minkowski sum of `M^j·` (depth-`n` centres of `A_{M^groups}`)
/// over `j < groups`.
pub fn minkowski_decomposition_check<S: Scalar>(
    sys: &RawSystem,
    groups: usize,
    depth: usize,
) -> Result<MinkowskiReport> {
    if groups == 0 || depth % groups != 0 {
        return Err(Error::InvalidArgument(format!(
            "depth {depth} is not a positive multiple of {groups}"
        )));
    }
    if depth > MAX_CLOUD_DEPTH {
        return Err(Error::DepthCap {
            depth,
            cap: MAX_CLOUD_DEPTH,
        });
    }
    let m = sys.matrix_as::<S>();
    let u = sys.u_as::<S>();
    let direct = zero_one_centers(&m, &u, depth);
    let regrouped = minkowski_sum_centers(&m, &u, groups, depth / groups);
    let exact = S::MODE == ArithmeticMode::Exact;
    let (equal, first_mismatch, max_deviation) =
        compare_multisets(&direct, &regrouped, if exact { 0.0 } else { 1e-9 });
    Ok(MinkowskiReport {
        groups,
        depth,
        count: direct.len(),
        equal,
        exact,
        first_mismatch,
        max_deviation,
    })
}

/// One point per line, coordinates comma-separated with 17 significant
/// digits.
pub fn write_points_csv<W: Write>(out: &mut W, points: impl IntoIterator<Item = Vec<f64>>) -> std::io::Result<()> {
    for p in points {
        let cells: Vec<String> = p.iter().map(|x| format!("{x:.16e}")).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}
