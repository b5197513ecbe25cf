//! Heuristic eigenstructure extraction from a numeric matrix.

use nalgebra::Complex;

use super::{krylov_cyclic_check, Angle, BlockKind, Modulus, Provenance, RawSystem, SpectralBlock, SpectralSpec};
use crate::error::{Error, Result};

pub const DEFAULT_ANGLE_DENOMINATOR_CAP: u64 = 64;
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Eigenvalues closer than `CLUSTER_FACTOR·sqrt(tol)·scale` are merged into
/// one Jordan block; separations up to `AMBIGUITY_FACTOR` times that are
/// rejected as ill-conditioned.
const CLUSTER_FACTOR: f64 = 10.0;
const AMBIGUITY_FACTOR: f64 = 100.0;

/// Groups the numeric eigenvalues of a cyclic system into spectral blocks.
///
/// A repeated eigenvalue of a cyclic matrix always belongs to a single
/// Jordan block, so clusters become Jordan blocks. Arguments are matched
/// against `(p/s)π` with `s ≤ angle_denominator_cap` through the continued
/// fraction of `arg/π`.
pub fn eigenstructure(
    sys: &RawSystem,
    angle_denominator_cap: u64,
    tolerance: f64,
) -> Result<SpectralSpec> {
    if !(tolerance > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let krylov = krylov_cyclic_check(sys);
    if !krylov.cyclic {
        return Err(Error::Derogatory(format!(
            "u is not cyclic (Krylov rank {} < {})",
            krylov.rank, krylov.dimension
        )));
    }
    let m = sys.matrix_as::<f64>();
    let scale = m.inf_norm().max(1.0);
    let merge = CLUSTER_FACTOR * tolerance.sqrt() * scale;
    let ambiguous = AMBIGUITY_FACTOR * merge;

    let eig: Vec<Complex<f64>> = m.to_nalgebra().complex_eigenvalues().iter().cloned().collect();

    // Single-linkage clustering; d is small.
    let n = eig.len();
    let mut label: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            let dist = (eig[i] - eig[j]).norm();
            if dist < merge {
                let (a, b) = (label[i], label[j]);
                for l in label.iter_mut() {
                    if *l == b {
                        *l = a;
                    }
                }
            }
        }
    }
    let mut clusters: Vec<Vec<Complex<f64>>> = Vec::new();
    let mut seen: Vec<usize> = Vec::new();
    for i in 0..n {
        match seen.iter().position(|&l| l == label[i]) {
            Some(k) => clusters[k].push(eig[i]),
            None => {
                seen.push(label[i]);
                clusters.push(vec![eig[i]]);
            }
        }
    }
    let centers: Vec<Complex<f64>> = clusters
        .iter()
        .map(|c| c.iter().sum::<Complex<f64>>() / c.len() as f64)
        .collect();
    for i in 0..centers.len() {
        for j in i + 1..centers.len() {
            let dist = (centers[i] - centers[j]).norm();
            if dist < ambiguous {
                return Err(Error::IllConditioned(format!(
                    "eigenvalues {} and {} are {dist:.3e} apart: neither clearly equal nor clearly distinct",
                    centers[i], centers[j]
                )));
            }
        }
    }

    let mut blocks = Vec::new();
    let mut covered = 0;
    let mut order: Vec<usize> = (0..centers.len()).collect();
    // Deterministic order: by modulus, then argument.
    order.sort_by(|&a, &b| {
        let (za, zb) = (centers[a], centers[b]);
        za.norm()
            .total_cmp(&zb.norm())
            .then(za.im.abs().total_cmp(&zb.im.abs()))
            .then(za.re.total_cmp(&zb.re))
    });
    for &k in &order {
        let z = centers[k];
        let size = clusters[k].len();
        let modulus = z.norm();
        if !(modulus > 0.0 && modulus < 1.0) {
            return Err(Error::ModulusOutOfRange(format!("{modulus}")));
        }
        if z.im.abs() < merge {
            covered += size;
            let kind = if size == 1 {
                if z.re > 0.0 {
                    BlockKind::RealPositive
                } else {
                    BlockKind::RealNegative
                }
            } else {
                BlockKind::Jordan {
                    size,
                    negative: z.re < 0.0,
                    angle: None,
                }
            };
            blocks.push(SpectralBlock::new(kind, Modulus::Approx(modulus))?);
        } else if z.im > 0.0 {
            covered += 2 * size;
            let turns = z.arg() / std::f64::consts::PI;
            let angle_tol = if size == 1 { tolerance } else { merge };
            let angle = match rational_pi_approximation(turns, angle_denominator_cap, angle_tol) {
                Some((p, s)) => Angle::RationalPi { p, s },
                None => Angle::Irrational(z.arg()),
            };
            let kind = if size == 1 {
                BlockKind::Rotation { angle }
            } else {
                BlockKind::Jordan {
                    size,
                    negative: false,
                    angle: Some(angle),
                }
            };
            blocks.push(SpectralBlock::new(kind, Modulus::Approx(modulus))?);
        }
    }
    if covered != n {
        return Err(Error::IllConditioned(
            "conjugate pairs could not be matched".into(),
        ));
    }
    SpectralSpec::new(blocks, Provenance::HeuristicFromMatrix { tolerance })
}

/// Best approximation `p/s` of `x ∈ (0, 1)` among continued-fraction
/// convergents with `s ≤ cap`, accepted only within `tol`.
pub fn rational_pi_approximation(x: f64, cap: u64, tol: f64) -> Option<(u64, u64)> {
    if !(x > 0.0 && x < 1.0) {
        return None;
    }
    // Convergents h_k / k_k.
    let (mut h_prev, mut h) = (0u64, 1u64);
    let (mut k_prev, mut k) = (1u64, 0u64);
    let mut rest = x;
    for _ in 0..64 {
        let a = rest.floor();
        if a > cap as f64 {
            break;
        }
        let a = a as u64;
        let h_next = a.checked_mul(h)?.checked_add(h_prev)?;
        let k_next = a.checked_mul(k)?.checked_add(k_prev)?;
        if k_next > cap {
            break;
        }
        (h_prev, h) = (h, h_next);
        (k_prev, k) = (k, k_next);
        if k > 0 && h > 0 && (x - h as f64 / k as f64).abs() <= tol {
            return Some((h, k));
        }
        let frac = rest - rest.floor();
        if frac < 1e-300 {
            break;
        }
        rest = 1.0 / frac;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    #[test]
    fn companion_of_rotation_is_rational_quarter() {
        let r: f64 = 0.9;
        let trace = 2.0 * r * (std::f64::consts::FRAC_PI_4).cos();
        let sys = RawSystem::from_f64(vec![vec![0.0, -r * r], vec![1.0, trace]], vec![1.0, 0.0]).unwrap();
        let spec = eigenstructure(&sys, 64, 1e-9).unwrap();
        assert_eq!(spec.blocks().len(), 1);
        let b = &spec.blocks()[0];
        assert_eq!(b.kind, BlockKind::Rotation { angle: Angle::RationalPi { p: 1, s: 4 } });
        assert!((b.modulus.to_f64() - 0.9).abs() < 1e-12);

        // Independent check of the eigenvalues: roots of z^2 - trace z + r^2.
        let disc = (trace * trace - 4.0 * r * r) as f64;
        assert!(disc < 0.0);
        let im = (-disc).sqrt() / 2.0;
        assert!(((trace / 2.0).hypot(im) - 0.9).abs() < 1e-12);
    }

    #[test]
    fn diagonal_gives_real_blocks() {
        let sys = RawSystem::from_f64(vec![vec![0.6, 0.0], vec![0.0, 0.8]], vec![1.0, 1.0]).unwrap();
        let spec = eigenstructure(&sys, 64, 1e-9).unwrap();
        let moduli: Vec<f64> = spec.blocks().iter().map(|b| b.modulus.to_f64()).collect();
        assert!(spec.blocks().iter().all(|b| b.kind == BlockKind::RealPositive));
        assert!((moduli[0] - 0.6).abs() < 1e-12 && (moduli[1] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn one_radian_is_irrational() {
        let (s, c) = 1.0_f64.sin_cos();
        let sys = RawSystem::from_f64(
            vec![vec![0.9 * c, -0.9 * s], vec![0.9 * s, 0.9 * c]],
            vec![1.0, 0.0],
        )
        .unwrap();
        let spec = eigenstructure(&sys, 64, 1e-9).unwrap();
        match &spec.blocks()[0].kind {
            BlockKind::Rotation { angle: Angle::Irrational(t) } => assert!((t - 1.0).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn convergents_of_one_over_pi() {
        // 1/π = [0; 3, 7, 15, 1, 292, ...]; convergents 1/3, 7/22, 106/333.
        let x = 1.0 / std::f64::consts::PI;
        assert_eq!(rational_pi_approximation(x, 64, 1e-3), Some((7, 22)));
        assert_eq!(rational_pi_approximation(x, 64, 1e-9), None);
        assert_eq!(rational_pi_approximation(x, 400, 1e-4), Some((106, 333)));
        assert_eq!(rational_pi_approximation(0.75, 64, 1e-12), Some((3, 4)));
    }

    #[test]
    fn jordan_cluster_is_detected() {
        let sys = RawSystem::from_f64(vec![vec![0.5, 1.0], vec![0.0, 0.5]], vec![0.0, 1.0]).unwrap();
        let spec = eigenstructure(&sys, 64, 1e-9).unwrap();
        assert!(matches!(spec.blocks()[0].kind, BlockKind::Jordan { size: 2, negative: false, angle: None }));
    }

    #[test]
    fn near_coincident_eigenvalues_are_ill_conditioned() {
        let sys = RawSystem::from_f64(vec![vec![0.5, 0.0], vec![0.0, 0.501]], vec![1.0, 1.0]).unwrap();
        assert!(matches!(eigenstructure(&sys, 64, 1e-9), Err(Error::IllConditioned(_))));
    }

    #[test]
    fn non_cyclic_input_is_rejected() {
        let m = Matrix::from_rows(vec![vec![0.5, 0.0], vec![0.0, 0.25]]).unwrap();
        let sys = RawSystem::from_f64(m.to_rows(), vec![1.0, 0.0]).unwrap();
        assert!(matches!(eigenstructure(&sys, 64, 1e-9), Err(Error::Derogatory(_))));
    }
}
