//! Input models for `M` and `u`: exact spectral descriptions, raw matrices,
//! cyclic-vector validation and the minimal real power.

mod eigen;
mod parse;

pub use eigen::{eigenstructure, rational_pi_approximation, DEFAULT_ANGLE_DENOMINATOR_CAP, DEFAULT_TOLERANCE};
pub use parse::{parse_spec, ParsedInput, SystemInput};

use std::fmt;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{f64_to_rational, rational_text, rational_to_f64, ArithmeticMode, Rational, Scalar};

/// Argument of a complex eigenvalue, as a fraction of π in (0, 1).
#[derive(Debug, Clone, PartialEq)]
pub enum Angle {
    /// `arg = (p/s)·π` with `gcd(p, s) = 1` and `0 < p < s`.
    RationalPi { p: u64, s: u64 },
    /// Radians; `arg/π` is taken to be irrational.
    Irrational(f64),
}

impl Angle {
    pub fn rational_pi(p: u64, s: u64) -> Result<Self> {
        if s == 0 || p == 0 || p >= s {
            return Err(Error::InvalidBlock(format!(
                "angle {p}/{s}·π is not in (0, π)"
            )));
        }
        if p.gcd(&s) != 1 {
            return Err(Error::InvalidBlock(format!("angle {p}/{s} is not reduced")));
        }
        Ok(Angle::RationalPi { p, s })
    }

    pub fn radians(&self) -> f64 {
        match *self {
            Angle::RationalPi { p, s } => std::f64::consts::PI * p as f64 / s as f64,
            Angle::Irrational(theta) => theta,
        }
    }

    fn text(&self) -> String {
        match *self {
            Angle::RationalPi { p, s } => format!("{p}/{s}pi"),
            Angle::Irrational(theta) => format!("irrational:{theta:?}"),
        }
    }
}

/// Modulus of an eigenvalue: exact when it came from a configuration,
/// approximate when it came from a numerical eigensolver.
#[derive(Debug, Clone, PartialEq)]
pub enum Modulus {
    Exact(Rational),
    Approx(f64),
}

impl Modulus {
    pub fn to_f64(&self) -> f64 {
        match self {
            Modulus::Exact(r) => rational_to_f64(r),
            Modulus::Approx(v) => *v,
        }
    }

    pub fn as_exact(&self) -> Option<&Rational> {
        match self {
            Modulus::Exact(r) => Some(r),
            Modulus::Approx(_) => None,
        }
    }

    fn check(&self) -> Result<()> {
        let ok = match self {
            Modulus::Exact(r) => r.is_positive() && *r < Rational::one(),
            Modulus::Approx(v) => v.is_finite() && *v > 0.0 && *v < 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::ModulusOutOfRange(self.text()))
        }
    }

    pub fn text(&self) -> String {
        match self {
            Modulus::Exact(r) => rational_text(r),
            Modulus::Approx(v) => format!("{v:?}"),
        }
    }

    fn pow(&self, e: usize) -> Modulus {
        match self {
            Modulus::Exact(r) => Modulus::Exact(num_traits::pow(r.clone(), e)),
            Modulus::Approx(v) => Modulus::Approx(v.powi(e as i32)),
        }
    }

    fn approx_eq(&self, other: &Modulus, tol: f64) -> bool {
        match (self, other) {
            (Modulus::Exact(a), Modulus::Exact(b)) => a == b,
            _ => (self.to_f64() - other.to_f64()).abs() <= tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BlockKind {
    RealPositive,
    RealNegative,
    /// A non-trivial Jordan block. `angle` is `None` for a real eigenvalue
    /// (whose sign is `negative`), otherwise the block is the real form of a
    /// complex Jordan block for the conjugate pair.
    Jordan {
        size: usize,
        negative: bool,
        angle: Option<Angle>,
    },
    /// Rotation-scaling block for the pair `κ, κ̄`.
    Rotation { angle: Angle },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralBlock {
    pub kind: BlockKind,
    pub modulus: Modulus,
}

impl SpectralBlock {
    pub fn real(value: Rational) -> Result<Self> {
        let kind = if value.is_negative() {
            BlockKind::RealNegative
        } else {
            BlockKind::RealPositive
        };
        Self::new(kind, Modulus::Exact(Signed::abs(&value)))
    }

    pub fn rotation(modulus: Rational, angle: Angle) -> Result<Self> {
        Self::new(BlockKind::Rotation { angle }, Modulus::Exact(modulus))
    }

    pub fn jordan(value: Rational, size: usize) -> Result<Self> {
        Self::new(
            BlockKind::Jordan {
                size,
                negative: value.is_negative(),
                angle: None,
            },
            Modulus::Exact(Signed::abs(&value)),
        )
    }

    pub fn new(kind: BlockKind, modulus: Modulus) -> Result<Self> {
        modulus.check()?;
        match &kind {
            BlockKind::Jordan { size, angle, .. } => {
                if *size < 2 {
                    return Err(Error::InvalidBlock(format!("jordan size {size} < 2")));
                }
                if let Some(a) = angle {
                    check_angle(a)?;
                }
            }
            BlockKind::Rotation { angle } => check_angle(angle)?,
            _ => {}
        }
        Ok(Self { kind, modulus })
    }

    /// Real dimension occupied by the block.
    pub fn dimension(&self) -> usize {
        match &self.kind {
            BlockKind::RealPositive | BlockKind::RealNegative => 1,
            BlockKind::Jordan { size, angle, .. } => {
                if angle.is_some() {
                    2 * size
                } else {
                    *size
                }
            }
            BlockKind::Rotation { .. } => 2,
        }
    }

    pub fn angle(&self) -> Option<&Angle> {
        match &self.kind {
            BlockKind::Rotation { angle } => Some(angle),
            BlockKind::Jordan { angle, .. } => angle.as_ref(),
            _ => None,
        }
    }

    pub fn is_jordan(&self) -> bool {
        matches!(self.kind, BlockKind::Jordan { .. })
    }

    /// Identity of the eigenvalue (up to conjugation) for derogatory checks.
    fn same_eigenvalue(&self, other: &SpectralBlock) -> bool {
        if !self.modulus.approx_eq(&other.modulus, 0.0) {
            return false;
        }
        let sign = |b: &SpectralBlock| match &b.kind {
            BlockKind::RealPositive => Some(false),
            BlockKind::RealNegative => Some(true),
            BlockKind::Jordan {
                negative,
                angle: None,
                ..
            } => Some(*negative),
            _ => None,
        };
        match (self.angle(), other.angle()) {
            (None, None) => sign(self) == sign(other),
            (Some(a), Some(b)) => a == b,
            _ => false,
        }
    }

    fn config_line(&self) -> String {
        let m = self.modulus.text();
        match &self.kind {
            BlockKind::RealPositive => format!("block real k={m}"),
            BlockKind::RealNegative => format!("block real k=-{m}"),
            BlockKind::Jordan {
                size,
                negative,
                angle,
            } => {
                let sign = if *negative { "-" } else { "" };
                match angle {
                    Some(a) => format!("block jordan k={m} size={size} angle={}", a.text()),
                    None => format!("block jordan k={sign}{m} size={size}"),
                }
            }
            BlockKind::Rotation { angle } => {
                format!("block rotation r={m} angle={}", angle.text())
            }
        }
    }
}

fn check_angle(a: &Angle) -> Result<()> {
    match *a {
        Angle::RationalPi { p, s } => Angle::rational_pi(p, s).map(|_| ()),
        Angle::Irrational(theta) => {
            if theta.is_finite() && theta > 0.0 && theta < std::f64::consts::PI {
                Ok(())
            } else {
                Err(Error::InvalidBlock(format!(
                    "irrational angle {theta} is not in (0, π)"
                )))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Exact,
    HeuristicFromMatrix { tolerance: f64 },
}

/// Exact eigenstructure of `M` as an ordered list of blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSpec {
    blocks: Vec<SpectralBlock>,
    provenance: Provenance,
}

impl SpectralSpec {
    pub fn new(blocks: Vec<SpectralBlock>, provenance: Provenance) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidBlock("no blocks".into()));
        }
        for (i, a) in blocks.iter().enumerate() {
            for b in &blocks[i + 1..] {
                if a.same_eigenvalue(b) {
                    return Err(Error::Derogatory(format!(
                        "blocks `{}` and `{}` share an eigenvalue, so no cyclic vector exists",
                        a.config_line(),
                        b.config_line()
                    )));
                }
            }
        }
        Ok(Self { blocks, provenance })
    }

    pub fn exact(blocks: Vec<SpectralBlock>) -> Result<Self> {
        Self::new(blocks, Provenance::Exact)
    }

    pub fn blocks(&self) -> &[SpectralBlock] {
        &self.blocks
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn dimension(&self) -> usize {
        self.blocks.iter().map(SpectralBlock::dimension).sum()
    }

    pub fn is_heuristic(&self) -> bool {
        !matches!(self.provenance, Provenance::Exact)
    }

    /// `|det M|` as the product of block moduli raised to block dimensions.
    pub fn det_abs(&self) -> Modulus {
        let exact: Option<Vec<&Rational>> =
            self.blocks.iter().map(|b| b.modulus.as_exact()).collect();
        match exact {
            Some(_) => Modulus::Exact(self.blocks.iter().fold(Rational::one(), |acc, b| {
                match b.modulus.pow(b.dimension()) {
                    Modulus::Exact(r) => acc * r,
                    Modulus::Approx(_) => unreachable!(),
                }
            })),
            None => Modulus::Approx(
                self.blocks
                    .iter()
                    .map(|b| b.modulus.to_f64().powi(b.dimension() as i32))
                    .product(),
            ),
        }
    }

    pub fn to_config_text(&self) -> String {
        let mut out = String::new();
        for b in &self.blocks {
            out.push_str(&b.config_line());
            out.push('\n');
        }
        out
    }

    /// Block-diagonal matrix with this spectrum, together with the cyclic
    /// vector built from each block's last basis vector. The result is exact
    /// whenever every entry is rational.
    pub fn realize(&self) -> RawSystem {
        let d = self.dimension();
        let mut entries = vec![vec![0.0_f64; d]; d];
        let mut exact_entries = vec![vec![Rational::zero(); d]; d];
        let mut u = vec![Rational::zero(); d];
        let mut exact = true;
        let mut offset = 0;
        for b in &self.blocks {
            let r_exact = b.modulus.as_exact().cloned();
            let r = b.modulus.to_f64();
            if r_exact.is_none() {
                exact = false;
            }
            let rq = r_exact.unwrap_or_else(|| f64_to_rational(r).unwrap_or_default());
            let mut put = |i: usize, j: usize, v: f64, q: Option<Rational>| {
                entries[offset + i][offset + j] = v;
                match q {
                    Some(q) => exact_entries[offset + i][offset + j] = q,
                    None => {
                        exact = false;
                        exact_entries[offset + i][offset + j] =
                            f64_to_rational(v).unwrap_or_default();
                    }
                }
            };
            match &b.kind {
                BlockKind::RealPositive => {
                    put(0, 0, r, Some(rq.clone()));
                    u[offset] = Rational::one();
                }
                BlockKind::RealNegative => {
                    put(0, 0, -r, Some(-rq.clone()));
                    u[offset] = Rational::one();
                }
                BlockKind::Jordan {
                    size,
                    negative,
                    angle: None,
                } => {
                    let (v, q) = if *negative { (-r, -rq.clone()) } else { (r, rq.clone()) };
                    for i in 0..*size {
                        put(i, i, v, Some(q.clone()));
                        if i + 1 < *size {
                            put(i, i + 1, 1.0, Some(Rational::one()));
                        }
                    }
                    u[offset + size - 1] = Rational::one();
                }
                BlockKind::Jordan {
                    size,
                    angle: Some(angle),
                    ..
                } => {
                    for k in 0..*size {
                        rotation_entries(&mut put, 2 * k, r, &rq, angle);
                        if k + 1 < *size {
                            put(2 * k, 2 * k + 2, 1.0, Some(Rational::one()));
                            put(2 * k + 1, 2 * k + 3, 1.0, Some(Rational::one()));
                        }
                    }
                    u[offset + 2 * size - 2] = Rational::one();
                }
                BlockKind::Rotation { angle } => {
                    rotation_entries(&mut put, 0, r, &rq, angle);
                    u[offset] = Rational::one();
                }
            }
            offset += b.dimension();
        }
        let mode = if exact {
            ArithmeticMode::Exact
        } else {
            ArithmeticMode::Float
        };
        let matrix = Matrix::from_rows(exact_entries).expect("square by construction");
        RawSystem::new(matrix, u, mode).expect("realization of a valid spec is a valid system")
    }
}

/// Writes `r·[[cos θ, -sin θ], [sin θ, cos θ]]` at `(at, at)`. Only θ = π/2
/// has rational entries.
fn rotation_entries(
    put: &mut impl FnMut(usize, usize, f64, Option<Rational>),
    at: usize,
    r: f64,
    rq: &Rational,
    angle: &Angle,
) {
    if let Angle::RationalPi { p: 1, s: 2 } = angle {
        put(at, at, 0.0, Some(Rational::zero()));
        put(at + 1, at + 1, 0.0, Some(Rational::zero()));
        put(at, at + 1, -r, Some(-rq.clone()));
        put(at + 1, at, r, Some(rq.clone()));
        return;
    }
    let theta = angle.radians();
    let (s, c) = theta.sin_cos();
    put(at, at, r * c, None);
    put(at + 1, at + 1, r * c, None);
    put(at, at + 1, -r * s, None);
    put(at + 1, at, r * s, None);
}

/// A `d×d` matrix with exact rational entries, the digit vector `u`, and the
/// arithmetic mode used for downstream computation. Float-mode systems keep
/// their entries as the exact dyadic values of the doubles.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSystem {
    matrix: Matrix<Rational>,
    u: Vec<Rational>,
    mode: ArithmeticMode,
}

impl RawSystem {
    pub fn new(matrix: Matrix<Rational>, u: Vec<Rational>, mode: ArithmeticMode) -> Result<Self> {
        if !matrix.is_square() || matrix.rows() == 0 {
            return Err(Error::InvalidSystem("matrix must be square and non-empty".into()));
        }
        if u.len() != matrix.rows() {
            return Err(Error::InvalidSystem(format!(
                "u has length {} but the matrix is {}x{}",
                u.len(),
                matrix.rows(),
                matrix.cols()
            )));
        }
        if u.iter().all(Zero::is_zero) {
            return Err(Error::InvalidSystem("u is the zero vector".into()));
        }
        if matrix.determinant().is_zero() {
            return Err(Error::InvalidSystem("M is singular".into()));
        }
        let rho = spectral_radius(&matrix.to_f64());
        if !(rho < 1.0) {
            return Err(Error::InvalidSystem(format!(
                "spectral radius {rho} is not below 1"
            )));
        }
        Ok(Self { matrix, u, mode })
    }

    pub fn from_f64(rows: Vec<Vec<f64>>, u: Vec<f64>) -> Result<Self> {
        let rows = rows
            .into_iter()
            .map(|r| r.into_iter().map(f64_to_rational).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let u = u.into_iter().map(f64_to_rational).collect::<Result<Vec<_>>>()?;
        Self::new(Matrix::from_rows(rows)?, u, ArithmeticMode::Float)
    }

    pub fn exact(rows: Vec<Vec<Rational>>, u: Vec<Rational>) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?, u, ArithmeticMode::Exact)
    }

    pub fn dimension(&self) -> usize {
        self.matrix.rows()
    }

    pub fn mode(&self) -> ArithmeticMode {
        self.mode
    }

    pub fn with_mode(&self, mode: ArithmeticMode) -> Self {
        Self {
            mode,
            ..self.clone()
        }
    }

    pub fn matrix(&self) -> &Matrix<Rational> {
        &self.matrix
    }

    pub fn u(&self) -> &[Rational] {
        &self.u
    }

    pub fn matrix_as<S: Scalar>(&self) -> Matrix<S> {
        self.matrix.map(S::from_rational)
    }

    pub fn u_as<S: Scalar>(&self) -> Vec<S> {
        self.u.iter().map(S::from_rational).collect()
    }

    /// `|det M|`, exact in exact mode.
    pub fn det_abs(&self) -> Modulus {
        let det = Signed::abs(&self.matrix.determinant());
        match self.mode {
            ArithmeticMode::Exact => Modulus::Exact(det),
            ArithmeticMode::Float => Modulus::Approx(rational_to_f64(&det)),
        }
    }

    /// Block-diagonal system made of two independent systems, with `u`
    /// stacked.
    pub fn direct_sum(&self, other: &RawSystem) -> Result<Self> {
        let (a, b) = (self.dimension(), other.dimension());
        let mut rows = vec![vec![Rational::zero(); a + b]; a + b];
        for i in 0..a {
            for j in 0..a {
                rows[i][j] = self.matrix[(i, j)].clone();
            }
        }
        for i in 0..b {
            for j in 0..b {
                rows[a + i][a + j] = other.matrix[(i, j)].clone();
            }
        }
        let u = self.u.iter().chain(&other.u).cloned().collect();
        let mode = if self.mode == ArithmeticMode::Exact && other.mode == ArithmeticMode::Exact {
            ArithmeticMode::Exact
        } else {
            ArithmeticMode::Float
        };
        Self::new(Matrix::from_rows(rows)?, u, mode)
    }

    /// The system `{M^q v ± u}`, whose attractor carries the addresses
    /// `a_j a_{q+j} a_{2q+j} ...`.
    pub fn power(&self, q: usize) -> Result<Self> {
        Self::new(self.matrix.pow(q), self.u.clone(), self.mode)
    }

    pub fn to_config_text(&self) -> String {
        let mut out = String::new();
        out.push_str(match self.mode {
            ArithmeticMode::Exact => "mode exact\n",
            ArithmeticMode::Float => "mode float\n",
        });
        for row in self.matrix.to_rows() {
            let cells: Vec<String> = row.iter().map(rational_text).collect();
            out.push_str(&format!("row {}\n", cells.join(" ")));
        }
        let cells: Vec<String> = self.u.iter().map(rational_text).collect();
        out.push_str(&format!("u {}\n", cells.join(" ")));
        out
    }
}

impl fmt::Display for RawSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_config_text())
    }
}

pub(crate) fn spectral_radius(m: &Matrix<f64>) -> f64 {
    m.to_nalgebra()
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KrylovReport {
    pub cyclic: bool,
    pub rank: usize,
    pub dimension: usize,
}

/// Rank of `[u, Mu, ..., M^{d-1}u]`; by Cayley–Hamilton higher powers add
/// nothing to the span.
pub fn krylov_cyclic_check(sys: &RawSystem) -> KrylovReport {
    let d = sys.dimension();
    let rank = match sys.mode() {
        ArithmeticMode::Exact => sys.matrix().krylov(sys.u(), d).rank_exact(),
        ArithmeticMode::Float => {
            let m = sys.matrix_as::<f64>();
            m.krylov(&sys.u_as::<f64>(), d).rank_float(1e-9)
        }
    };
    KrylovReport {
        cyclic: rank == d,
        rank,
        dimension: d,
    }
}

/// Least `q ≥ 1` with `κ^q` real for every eigenvalue: the lcm of the
/// denominators `s` of the angles `(p/s)π`.
pub fn minimal_real_power(spec: &SpectralSpec) -> Result<u64> {
    let mut q = 1u64;
    for (i, b) in spec.blocks().iter().enumerate() {
        match b.angle() {
            None => {}
            Some(Angle::RationalPi { s, .. }) => q = q.lcm(s),
            Some(Angle::Irrational(_)) => return Err(Error::QUndefined(i)),
        }
    }
    Ok(q)
}

/// Sign of `κ^q` for a block whose `q`-th power is real.
pub fn sign_of_power(block: &SpectralBlock, q: u64) -> Result<i8> {
    let parity = |neg: bool| if neg && q % 2 == 1 { -1 } else { 1 };
    match &block.kind {
        BlockKind::RealPositive => Ok(1),
        BlockKind::RealNegative => Ok(parity(true)),
        BlockKind::Jordan {
            negative,
            angle: None,
            ..
        } => Ok(parity(*negative)),
        BlockKind::Rotation { angle }
        | BlockKind::Jordan {
            angle: Some(angle), ..
        } => match *angle {
            Angle::RationalPi { p, s } => {
                if (q * p) % s != 0 {
                    return Err(Error::SignUndefined(format!(
                        "κ^{q} is not real for angle {p}/{s}·π"
                    )));
                }
                Ok(if (q * p / s) % 2 == 0 { 1 } else { -1 })
            }
            Angle::Irrational(_) => Err(Error::SignUndefined(
                "irrational angle has no real power".into(),
            )),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn rot(r: Rational, p: u64, s: u64) -> SpectralBlock {
        SpectralBlock::rotation(r, Angle::rational_pi(p, s).unwrap()).unwrap()
    }

    fn exact(rows: &[&[(i64, i64)]], u: &[(i64, i64)]) -> RawSystem {
        RawSystem::exact(
            rows.iter()
                .map(|r| r.iter().map(|&(n, d)| rat(n, d)).collect())
                .collect(),
            u.iter().map(|&(n, d)| rat(n, d)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn krylov_examples() {
        let distinct = exact(&[&[(1, 2), (0, 1)], &[(0, 1), (1, 4)]], &[(1, 1), (1, 1)]);
        assert!(krylov_cyclic_check(&distinct).cyclic);

        let scalar = exact(&[&[(1, 2), (0, 1)], &[(0, 1), (1, 2)]], &[(1, 1), (1, 1)]);
        let report = krylov_cyclic_check(&scalar);
        assert!(!report.cyclic);
        assert_eq!(report.rank, 1);

        let jordan = exact(&[&[(1, 2), (1, 1)], &[(0, 1), (1, 2)]], &[(0, 1), (1, 1)]);
        assert!(krylov_cyclic_check(&jordan).cyclic);
    }

    #[test]
    fn krylov_float_mode() {
        let sys = RawSystem::from_f64(vec![vec![0.5, 0.0], vec![0.0, 0.25]], vec![1.0, 1.0]).unwrap();
        assert!(krylov_cyclic_check(&sys).cyclic);
        let sys = RawSystem::from_f64(vec![vec![0.5, 0.0], vec![0.0, 0.25]], vec![1.0, 0.0]).unwrap();
        assert!(!krylov_cyclic_check(&sys).cyclic);
    }

    #[test]
    fn minimal_real_power_examples() {
        let one = SpectralSpec::exact(vec![rot(rat(19, 20), 1, 2)]).unwrap();
        assert_eq!(minimal_real_power(&one).unwrap(), 2);

        let two = SpectralSpec::exact(vec![rot(rat(1, 2), 3, 4), rot(rat(1, 2), 1, 3)]).unwrap();
        assert_eq!(minimal_real_power(&two).unwrap(), 12);

        let signs = SpectralSpec::exact(vec![
            SpectralBlock::real(rat(-9, 10)).unwrap(),
            SpectralBlock::real(rat(9, 10)).unwrap(),
        ])
        .unwrap();
        assert_eq!(minimal_real_power(&signs).unwrap(), 1);

        let irr = SpectralSpec::exact(vec![SpectralBlock::new(
            BlockKind::Rotation {
                angle: Angle::Irrational(1.0),
            },
            Modulus::Exact(rat(9, 10)),
        )
        .unwrap()])
        .unwrap();
        assert_eq!(minimal_real_power(&irr), Err(Error::QUndefined(0)));
    }

    #[test]
    fn sign_of_power_examples() {
        assert_eq!(sign_of_power(&rot(rat(1, 2), 3, 4), 12).unwrap(), -1);
        assert_eq!(sign_of_power(&rot(rat(1, 2), 1, 2), 2).unwrap(), -1);
        let neg = SpectralBlock::real(rat(-1, 2)).unwrap();
        assert_eq!(sign_of_power(&neg, 1).unwrap(), -1);
        assert_eq!(sign_of_power(&neg, 2).unwrap(), 1);
        assert!(sign_of_power(&rot(rat(1, 2), 1, 3), 2).is_err());
    }

    #[test]
    fn block_validation() {
        assert!(SpectralBlock::real(rat(6, 5)).is_err());
        assert!(SpectralBlock::jordan(rat(1, 2), 1).is_err());
        assert!(Angle::rational_pi(2, 4).is_err());
        assert!(Angle::rational_pi(3, 2).is_err());
        let dup = SpectralSpec::exact(vec![rot(rat(1, 2), 1, 3), rot(rat(1, 2), 1, 3)]);
        assert!(matches!(dup, Err(Error::Derogatory(_))));
    }

    #[test]
    fn realization_is_exact_when_possible() {
        let spec = SpectralSpec::exact(vec![
            rot(rat(19, 20), 1, 2),
            SpectralBlock::jordan(rat(-1, 2), 3).unwrap(),
        ])
        .unwrap();
        let sys = spec.realize();
        assert_eq!(sys.mode(), ArithmeticMode::Exact);
        assert_eq!(sys.dimension(), 5);
        assert!(krylov_cyclic_check(&sys).cyclic);
        assert_eq!(spec.det_abs(), Modulus::Exact(rat(361, 400) * rat(1, 8)));
        assert_eq!(sys.det_abs(), spec.det_abs());

        let spec = SpectralSpec::exact(vec![rot(rat(9, 10), 1, 4)]).unwrap();
        let sys = spec.realize();
        assert_eq!(sys.mode(), ArithmeticMode::Float);
        assert!((sys.det_abs().to_f64() - 0.81).abs() < 1e-12);
    }

    #[test]
    fn rejects_invalid_systems() {
        assert!(RawSystem::from_f64(vec![vec![1.2]], vec![1.0]).is_err());
        assert!(RawSystem::from_f64(vec![vec![0.5]], vec![0.0]).is_err());
        assert!(RawSystem::from_f64(vec![vec![0.0, 0.0], vec![0.0, 0.5]], vec![1.0, 1.0]).is_err());
    }
}
