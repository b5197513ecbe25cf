//! The coding map `π_M(a) = Σ a_k M^k u` and the attractor it parametrises.

mod cloud;
mod interior;
mod render;

pub use cloud::{
    chaos_game, compare_multisets, cylinder_cloud, minkowski_decomposition_check, minkowski_sum_centers,
    write_points_csv, zero_one_centers, CylinderCloud, MinkowskiReport, MAX_CLOUD_DEPTH,
};
pub use interior::{
    interior_certificate, interior_search, InteriorCertificate, InteriorOptions, InteriorStatus,
    DEFAULT_SEARCH_DEPTHS,
};
pub use render::{render_image, PixelMode, Raster, Viewport};

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{add_vec, inf_norm_vec, scale_vec, Matrix};
use crate::scalar::Scalar;
use crate::spectral::RawSystem;

/// Largest `m` tried when looking for `‖M^m‖∞ < 1`.
pub const NORM_CERTIFICATE_CAP: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Tail {
    /// Digits after the head are unspecified.
    Free,
    Periodic(Vec<i8>),
}

/// A word over `{-1, +1}`: a finite head followed by a free or periodic tail.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Address {
    head: Vec<i8>,
    tail: Tail,
}

fn check_digits(w: &[i8]) -> Result<()> {
    match w.iter().find(|&&x| x != 1 && x != -1) {
        Some(x) => Err(Error::InvalidAddress(format!("digit {x} is not ±1"))),
        None => Ok(()),
    }
}

impl Address {
    pub fn new(head: Vec<i8>, tail: Tail) -> Result<Self> {
        check_digits(&head)?;
        if let Tail::Periodic(p) = &tail {
            if p.is_empty() {
                return Err(Error::InvalidAddress("empty period".into()));
            }
            check_digits(p)?;
        }
        Ok(Self { head, tail })
    }

    pub fn finite(head: Vec<i8>) -> Result<Self> {
        Self::new(head, Tail::Free)
    }

    pub fn periodic(head: Vec<i8>, period: Vec<i8>) -> Result<Self> {
        Self::new(head, Tail::Periodic(period))
    }

    /// `w^∞`.
    pub fn purely_periodic(period: Vec<i8>) -> Result<Self> {
        Self::periodic(Vec::new(), period)
    }

    pub fn head(&self) -> &[i8] {
        &self.head
    }

    pub fn tail(&self) -> &Tail {
        &self.tail
    }

    pub fn preperiod(&self) -> usize {
        self.head.len()
    }

    pub fn period(&self) -> Option<&[i8]> {
        match &self.tail {
            Tail::Periodic(p) => Some(p),
            Tail::Free => None,
        }
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self.tail, Tail::Periodic(_))
    }

    /// `a_k`, or `None` past the head of a free address.
    pub fn digit(&self, k: usize) -> Option<i8> {
        if k < self.head.len() {
            return Some(self.head[k]);
        }
        match &self.tail {
            Tail::Periodic(p) => Some(p[(k - self.head.len()) % p.len()]),
            Tail::Free => None,
        }
    }

    pub fn prefix(&self, n: usize) -> Result<Vec<i8>> {
        (0..n)
            .map(|k| {
                self.digit(k).ok_or_else(|| {
                    Error::InvalidAddress(format!(
                        "digit {k} requested but the address has a free tail after {} digits",
                        self.head.len()
                    ))
                })
            })
            .collect()
    }

    pub fn negate(&self) -> Self {
        let neg = |w: &[i8]| w.iter().map(|x| -x).collect::<Vec<_>>();
        Self {
            head: neg(&self.head),
            tail: match &self.tail {
                Tail::Free => Tail::Free,
                Tail::Periodic(p) => Tail::Periodic(neg(p)),
            },
        }
    }

    /// The shift `σ^m a = a_m a_{m+1} ...`.
    pub fn shift(&self, m: usize) -> Self {
        if m <= self.head.len() {
            return Self {
                head: self.head[m..].to_vec(),
                tail: self.tail.clone(),
            };
        }
        match &self.tail {
            Tail::Free => Self {
                head: Vec::new(),
                tail: Tail::Free,
            },
            Tail::Periodic(p) => {
                let r = (m - self.head.len()) % p.len();
                let mut rotated = p[r..].to_vec();
                rotated.extend_from_slice(&p[..r]);
                Self {
                    head: Vec::new(),
                    tail: Tail::Periodic(rotated),
                }
            }
        }
    }

    /// Same infinite word with the shortest head and period.
    pub fn normalized(&self) -> Self {
        let Tail::Periodic(p) = &self.tail else {
            return self.clone();
        };
        let n = p.len();
        let period_len = (1..=n)
            .find(|&k| n % k == 0 && (0..n).all(|i| p[i] == p[i % k]))
            .unwrap_or(n);
        let mut head = self.head.clone();
        let mut period = p[..period_len].to_vec();
        // Absorb trailing head digits into the period.
        while let Some(&last) = head.last() {
            if last != period[period_len - 1] {
                break;
            }
            head.pop();
            period.rotate_right(1);
        }
        Self {
            head,
            tail: Tail::Periodic(period),
        }
    }
}

fn word_text(w: &[i8]) -> String {
    w.iter().map(|&x| if x > 0 { '+' } else { '-' }).collect()
}

impl fmt::Display for Address {
    /// `+-+(+-)`: head digits, then the period in parentheses; a free tail
    /// is written `...`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&word_text(&self.head))?;
        match &self.tail {
            Tail::Free => f.write_str("..."),
            Tail::Periodic(p) => write!(f, "({})", word_text(p)),
        }
    }
}

impl FromStr for Address {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let text = text.trim();
        let digits = |s: &str| -> Result<Vec<i8>> {
            s.chars()
                .filter(|c| !c.is_whitespace() && *c != ',')
                .map(|c| match c {
                    '+' | '1' => Ok(1),
                    '-' => Ok(-1),
                    other => Err(Error::InvalidAddress(format!("unexpected character `{other}`"))),
                })
                .collect()
        };
        if let Some(head) = text.strip_suffix("...") {
            return Self::finite(digits(head)?);
        }
        match text.find('(') {
            Some(open) => {
                let inner = text[open + 1..]
                    .strip_suffix(')')
                    .ok_or_else(|| Error::InvalidAddress("unclosed period".into()))?;
                Self::periodic(digits(&text[..open])?, digits(inner)?)
            }
            None => Self::finite(digits(text)?),
        }
    }
}

impl Serialize for Address {
    fn serialize<Z: Serializer>(&self, s: Z) -> std::result::Result<Z::Ok, Z::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Tail bounds `T_n ≥ Σ_{k≥n} ‖M^k u‖∞` from an `m`-step norm certificate
/// `ρ = ‖M^m‖∞ < 1`: `T_n = Σ_{i<m} ‖M^{n+i} u‖∞ / (1 - ρ)`.
#[derive(Debug, Clone)]
pub struct TailBounds<S: Scalar> {
    m: usize,
    rho: S,
    matrix: Matrix<S>,
    /// `M^k u` for `k < orbit.len()`.
    orbit: Vec<Vec<S>>,
    norms: Vec<S>,
}

impl<S: Scalar> TailBounds<S> {
    pub fn new(matrix: Matrix<S>, u: Vec<S>, cap: usize) -> Result<Self> {
        let mut power = matrix.clone();
        let mut found = None;
        for m in 1..=cap {
            let rho = power.inf_norm().guard_up();
            if rho < S::one() {
                found = Some((m, rho));
                break;
            }
            power = power.mul(&matrix);
        }
        let (m, rho) = found.ok_or(Error::NormCertificate { cap })?;
        let norms = vec![inf_norm_vec(&u)];
        Ok(Self {
            m,
            rho,
            matrix,
            orbit: vec![u],
            norms,
        })
    }

    pub fn for_system(sys: &RawSystem) -> Result<Self> {
        Self::new(sys.matrix_as::<S>(), sys.u_as::<S>(), NORM_CERTIFICATE_CAP)
    }

    /// The `m` of the norm certificate.
    pub fn certificate_power(&self) -> usize {
        self.m
    }

    pub fn rho(&self) -> &S {
        &self.rho
    }

    fn extend_to(&mut self, k: usize) {
        while self.orbit.len() <= k {
            let next = self.matrix.mul_vec(self.orbit.last().expect("orbit starts with u"));
            self.norms.push(inf_norm_vec(&next));
            self.orbit.push(next);
        }
    }

    /// `M^k u`.
    pub fn orbit(&mut self, k: usize) -> &[S] {
        self.extend_to(k);
        &self.orbit[k]
    }

    pub fn orbit_norm(&mut self, k: usize) -> S {
        self.extend_to(k);
        self.norms[k].clone()
    }

    pub fn bound(&mut self, n: usize) -> S {
        self.extend_to(n + self.m);
        let head = self.norms[n..n + self.m]
            .iter()
            .cloned()
            .fold(S::zero(), |a, b| a + b);
        (head / (S::one() - self.rho.clone())).guard_up()
    }
}

/// `T_n` for the system's arithmetic backend `S`.
pub fn tail_bound<S: Scalar>(sys: &RawSystem, n: usize) -> Result<S> {
    Ok(TailBounds::<S>::for_system(sys)?.bound(n))
}

/// `Σ_{k<n} a_k M^k u` together with `T_n`: `π_M(a)` lies in the ∞-norm
/// ball of that radius around the point.
pub fn project_address<S: Scalar>(sys: &RawSystem, a: &Address, n: usize) -> Result<(Vec<S>, S)> {
    let digits = a.prefix(n)?;
    let mut tails = TailBounds::<S>::for_system(sys)?;
    let mut point = vec![S::zero(); sys.dimension()];
    for (k, &x) in digits.iter().enumerate() {
        let term = scale_vec(tails.orbit(k), &S::from_i64(x as i64));
        point = add_vec(&point, &term);
    }
    Ok((point, tails.bound(n)))
}

/// `π_M(a)` for an eventually periodic address, from
/// `π(a) = Σ_{k<ℓ} a_k M^k u + M^ℓ (I - M^p)^{-1} Σ_{k<p} t_k M^k u`.
pub fn exact_limit<S: Scalar>(sys: &RawSystem, a: &Address) -> Result<Vec<S>> {
    let period = a.period().ok_or(Error::NotPeriodic)?;
    let m = sys.matrix_as::<S>();
    let u = sys.u_as::<S>();
    let d = sys.dimension();
    let p = period.len();
    let mut orbit = u;
    let mut head = vec![S::zero(); d];
    for &x in a.head() {
        head = add_vec(&head, &scale_vec(&orbit, &S::from_i64(x as i64)));
        orbit = m.mul_vec(&orbit);
    }
    // orbit is now M^ℓ u.
    let mut body = vec![S::zero(); d];
    let mut v = orbit;
    for &x in period {
        body = add_vec(&body, &scale_vec(&v, &S::from_i64(x as i64)));
        v = m.mul_vec(&v);
    }
    // body = M^ℓ Σ t_k M^k u; M^ℓ commutes with (I - M^p)^{-1}.
    let lhs = Matrix::<S>::identity(d).sub(&m.pow(p));
    let tail = lhs.solve(&body)?;
    Ok(add_vec(&head, &tail))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rational};

    fn diag_half_quarter() -> RawSystem {
        RawSystem::exact(
            vec![vec![rat(1, 2), rat(0, 1)], vec![rat(0, 1), rat(1, 4)]],
            vec![rat(1, 1), rat(1, 1)],
        )
        .unwrap()
    }

    #[test]
    fn geometric_tail_bounds() {
        let one_d = RawSystem::exact(vec![vec![rat(1, 2)]], vec![rat(1, 1)]).unwrap();
        assert_eq!(tail_bound::<Rational>(&one_d, 3).unwrap(), rat(1, 4));
        assert_eq!(tail_bound::<Rational>(&diag_half_quarter(), 0).unwrap(), rat(2, 1));
        let f: f64 = tail_bound(&diag_half_quarter(), 0).unwrap();
        assert!(f >= 2.0 && f < 2.0 + 1e-8);
    }

    #[test]
    fn norm_certificate_needs_several_steps() {
        // ‖M‖∞ = 1, spectral radius ≈ 0.81.
        let sys = RawSystem::exact(
            vec![vec![rat(0, 1), rat(1, 1)], vec![rat(1, 4), rat(1, 2)]],
            vec![rat(1, 1), rat(0, 1)],
        )
        .unwrap();
        let t = TailBounds::<Rational>::for_system(&sys).unwrap();
        assert!(t.certificate_power() > 1);
    }

    #[test]
    fn exact_limits() {
        let sys = diag_half_quarter();
        let plus = Address::purely_periodic(vec![1]).unwrap();
        assert_eq!(exact_limit::<Rational>(&sys, &plus).unwrap(), vec![rat(2, 1), rat(4, 3)]);
        let a = Address::periodic(vec![1], vec![-1]).unwrap();
        assert_eq!(exact_limit::<Rational>(&sys, &a).unwrap(), vec![rat(0, 1), rat(2, 3)]);
        let free = Address::finite(vec![1, 1]).unwrap();
        assert!(matches!(exact_limit::<Rational>(&sys, &free), Err(Error::NotPeriodic)));
    }

    #[test]
    fn projection_contains_the_limit() {
        let sys = diag_half_quarter();
        let a: Address = "+-(-++)".parse().unwrap();
        let limit = exact_limit::<Rational>(&sys, &a).unwrap();
        for n in [0, 1, 5, 20] {
            let (p, t) = project_address::<Rational>(&sys, &a, n).unwrap();
            let diff = crate::linalg::sub_vec(&limit, &p);
            assert!(inf_norm_vec(&diff) <= t);
        }
    }

    #[test]
    fn address_text_round_trips() {
        for text in ["+-(-++)", "(+)", "-+...", "()"] {
            match text.parse::<Address>() {
                Ok(a) => assert_eq!(a.to_string(), text),
                Err(_) => assert_eq!(text, "()"),
            }
        }
        assert!("+x".parse::<Address>().is_err());
    }

    #[test]
    fn shift_and_normalize() {
        let a: Address = "+-(-++)".parse().unwrap();
        assert_eq!(a.shift(1).to_string(), "-(-++)");
        assert_eq!(a.shift(4).to_string(), "(+-+)");
        for m in 0..12 {
            for k in 0..12 {
                assert_eq!(a.shift(m).digit(k), a.digit(m + k));
            }
        }
        let b: Address = "++(-+-+)".parse().unwrap();
        let n = b.normalized();
        assert_eq!(n.to_string(), "+(+-)");
        for k in 0..20 {
            assert_eq!(n.digit(k), b.digit(k));
        }
    }
}
