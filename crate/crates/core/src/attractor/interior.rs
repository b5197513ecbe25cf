//! Self-covering certificates for balls inside `A_M`.
//!
//! If every point of `K = B(x0, r)` lies in some `f_w(K) = c_w + M^n K` with
//! `|w| = n`, then `K ⊆ A_M`. Each `f_w(K)` contains the Euclidean ball of
//! radius `r·σ_min(M^n)` around `c_w + M^n x0`, so it suffices that every
//! grid cell meeting `K` has its centre within `r·σ_min(M^n) - h√d/2` of
//! such an image centre.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use super::TailBounds;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::FLOAT_GUARD;
use crate::spectral::RawSystem;

pub const DEFAULT_SEARCH_DEPTHS: [usize; 5] = [2, 4, 8, 16, 24];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum InteriorStatus {
    Certified,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InteriorCertificate {
    pub verdict: InteriorStatus,
    pub x0: Vec<f64>,
    pub r: f64,
    pub depth: usize,
    pub h: f64,
    /// Relative guard applied to the covering inequality.
    pub slack: f64,
    pub sigma_min: f64,
    pub grid_cells: usize,
    pub image_centers: usize,
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InteriorOptions {
    /// Upper limit on grid cells per test.
    pub max_grid_cells: usize,
    /// Upper limit on retained image centres per test.
    pub max_centers: usize,
}

impl Default for InteriorOptions {
    fn default() -> Self {
        Self {
            max_grid_cells: 4_000_000,
            max_centers: 20_000_000,
        }
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Depth-`n` image centres `c_w + M^n x0` within `reach` of `x0`, found by a
/// depth-first walk that drops prefixes whose completions cannot get there.
fn nearby_centers(
    m: &Matrix<f64>,
    u: &[f64],
    x0: &[f64],
    n: usize,
    reach: f64,
    tails: &mut TailBounds<f64>,
    cap: usize,
) -> Option<Vec<Vec<f64>>> {
    let d = u.len();
    let shift = m.pow(n).mul_vec(x0);
    let offset: Vec<f64> = (0..d).map(|i| shift[i] - x0[i]).collect();
    let orbit: Vec<Vec<f64>> = (0..n).map(|k| tails.orbit(k).to_vec()).collect();
    // Completion of a length-j prefix moves it by at most √d·T_j in 2-norm.
    let slack: Vec<f64> = (0..=n).map(|j| (d as f64).sqrt() * tails.bound(j) * (1.0 + FLOAT_GUARD)).collect();
    let top = n.min(8);
    let roots: Vec<usize> = (0..1usize << top).collect();
    let parts: Vec<Option<Vec<Vec<f64>>>> = roots
        .par_iter()
        .map(|&root| {
            let mut p = offset.clone();
            for k in 0..top {
                let s = if (root >> (top - 1 - k)) & 1 == 1 { 1.0 } else { -1.0 };
                for i in 0..d {
                    p[i] += s * orbit[k][i];
                }
            }
            if norm2(&p) > reach + slack[top] {
                return Some(Vec::new());
            }
            let mut found = Vec::new();
            let mut stack = vec![(top, p)];
            while let Some((j, p)) = stack.pop() {
                if j == n {
                    if norm2(&p) <= reach {
                        found.push(p.iter().zip(x0).map(|(a, b)| a + b).collect());
                        if found.len() > cap {
                            return None;
                        }
                    }
                    continue;
                }
                for s in [1.0, -1.0] {
                    let q: Vec<f64> = (0..d).map(|i| p[i] + s * orbit[j][i]).collect();
                    if norm2(&q) <= reach + slack[j + 1] {
                        stack.push((j + 1, q));
                    }
                }
            }
            Some(found)
        })
        .collect();
    let mut out = Vec::new();
    for part in parts {
        out.extend(part?);
        if out.len() > cap {
            return None;
        }
    }
    Some(out)
}

/// Integer lattice cells `x0 + h·(z + [0,1)^d)` meeting `B(x0, r)`.
fn grid_cells(d: usize, r: f64, h: f64, cap: usize) -> Option<Vec<Vec<i64>>> {
    let k = (r / h).ceil() as i64;
    let per_axis = 2 * k as usize;
    if (per_axis as f64).powi(d as i32) > cap as f64 * 4.0 {
        return None;
    }
    let mut out = Vec::new();
    let mut z = vec![-k; d];
    loop {
        // Nearest point of the cell to x0, relative to x0.
        let dist2: f64 = z
            .iter()
            .map(|&zi| {
                let lo = zi as f64 * h;
                let hi = lo + h;
                let c = 0.0_f64.clamp(lo, hi);
                c * c
            })
            .sum();
        if dist2 <= r * r {
            out.push(z.clone());
            if out.len() > cap {
                return None;
            }
        }
        let mut i = 0;
        loop {
            if i == d {
                return Some(out);
            }
            z[i] += 1;
            if z[i] < k {
                break;
            }
            z[i] = -k;
            i += 1;
        }
    }
}

/// Self-covering test for `B(x0, r)` at depth `n` with grid spacing `h`.
pub fn interior_certificate(
    sys: &RawSystem,
    x0: &[f64],
    r: f64,
    depth: usize,
    h: f64,
    options: &InteriorOptions,
) -> Result<InteriorCertificate> {
    let d = sys.dimension();
    if x0.len() != d {
        return Err(Error::InvalidArgument(format!("x0 has length {} but d = {d}", x0.len())));
    }
    if !(r > 0.0) || !(h > 0.0) || h > r {
        return Err(Error::InvalidArgument("need r > 0 and 0 < h ≤ r".into()));
    }
    let m = sys.matrix_as::<f64>();
    let u = sys.u_as::<f64>();
    let sigma = m.pow(depth).singular_values().last().copied().unwrap_or(0.0);
    let mut cert = InteriorCertificate {
        verdict: InteriorStatus::Inconclusive,
        x0: x0.to_vec(),
        r,
        depth,
        h,
        slack: FLOAT_GUARD,
        sigma_min: sigma,
        grid_cells: 0,
        image_centers: 0,
        reason: None,
    };
    let half_diag = h * (d as f64).sqrt() / 2.0;
    let rho = r * sigma;
    let allowed = rho * (1.0 - FLOAT_GUARD) - half_diag;
    if allowed <= 0.0 {
        cert.reason = Some(format!(
            "r·σ_min(M^n) = {rho:.3e} does not exceed h·√d/2 = {half_diag:.3e}; shrink h or n"
        ));
        return Ok(cert);
    }
    // 2^n balls of radius rσ cannot cover a ball of radius r unless their
    // total volume is large enough.
    if (depth as f64) * std::f64::consts::LN_2 + (d as f64) * sigma.ln() < 0.0 {
        cert.reason = Some("volume bound: 2^n·σ_min(M^n)^d < 1".into());
        return Ok(cert);
    }
    let Some(cells) = grid_cells(d, r, h, options.max_grid_cells) else {
        cert.reason = Some(format!("more than {} grid cells", options.max_grid_cells));
        return Ok(cert);
    };
    cert.grid_cells = cells.len();
    let mut tails = TailBounds::<f64>::for_system(sys)?;
    let reach = r + rho;
    let Some(centers) = nearby_centers(&m, &u, x0, depth, reach, &mut tails, options.max_centers) else {
        cert.reason = Some(format!("more than {} image centres near the ball", options.max_centers));
        return Ok(cert);
    };
    cert.image_centers = centers.len();

    // Spatial hash with bucket side `allowed`: a centre within `allowed` of
    // a point lies in one of the 3^d neighbouring buckets.
    let key = |p: &[f64]| -> Vec<i64> { p.iter().map(|x| (x / allowed).floor() as i64).collect() };
    let mut buckets: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for (i, c) in centers.iter().enumerate() {
        buckets.entry(key(c)).or_default().push(i);
    }
    let neighbours: Vec<Vec<i64>> = (0..3usize.pow(d as u32))
        .map(|mut t| {
            (0..d)
                .map(|_| {
                    let o = (t % 3) as i64 - 1;
                    t /= 3;
                    o
                })
                .collect()
        })
        .collect();
    let covered = |z: &Vec<i64>| -> bool {
        let g: Vec<f64> = (0..d).map(|i| x0[i] + (z[i] as f64 + 0.5) * h).collect();
        let base = key(&g);
        neighbours.iter().any(|off| {
            let b: Vec<i64> = base.iter().zip(off).map(|(a, o)| a + o).collect();
            buckets.get(&b).is_some_and(|ids| {
                ids.iter().any(|&i| {
                    let diff: Vec<f64> = (0..d).map(|k| g[k] - centers[i][k]).collect();
                    norm2(&diff) <= allowed
                })
            })
        })
    };
    match cells.par_iter().position_first(|z| !covered(z)) {
        None => cert.verdict = InteriorStatus::Certified,
        Some(i) => {
            let g: Vec<f64> = (0..d).map(|k| x0[k] + (cells[i][k] as f64 + 0.5) * h).collect();
            cert.reason = Some(format!("grid point {g:?} is not covered"));
        }
    }
    Ok(cert)
}

/// Tries radii `T_0·2^{-j}` for `j = 1..=max_halvings` at each depth in
/// turn, with `h = r·σ_min(M^n)/4`; returns the first certificate, or the
/// last attempt when none succeeds.
pub fn interior_search(
    sys: &RawSystem,
    x0: &[f64],
    depths: &[usize],
    max_halvings: usize,
    options: &InteriorOptions,
) -> Result<InteriorCertificate> {
    let t0: f64 = TailBounds::<f64>::for_system(sys)?.bound(0);
    let m = sys.matrix_as::<f64>();
    let mut last = None;
    for &n in depths {
        let sigma = m.pow(n).singular_values().last().copied().unwrap_or(0.0);
        for j in 1..=max_halvings {
            let r = t0 * 0.5f64.powi(j as i32);
            let h = (r * sigma / 4.0).min(r);
            let cert = interior_certificate(sys, x0, r, n, h, options)?;
            if cert.verdict == InteriorStatus::Certified {
                return Ok(cert);
            }
            last = Some(cert);
        }
    }
    last.ok_or_else(|| Error::InvalidArgument("no depths or radii to try".into()))
}
