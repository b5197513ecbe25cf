//! Small dense matrices over a [`Scalar`].

use nalgebra::DMatrix;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};

pub type Vector<S> = Vec<S>;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidSystem("ragged matrix rows".into()));
        }
        Ok(Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<S>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Matrix<T> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = a.clone() * other[(k, j)].clone();
                    let slot = &mut out[(i, j)];
                    *slot = slot.clone() + prod;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[S]) -> Vector<S> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, _)| !a.is_zero())
                    .fold(S::zero(), |acc, (a, x)| acc + a.clone() * x.clone())
            })
            .collect()
    }

    pub fn pow(&self, mut e: usize) -> Self {
        let mut base = self.clone();
        let mut acc = Self::identity(self.rows);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn scale(&self, s: &S) -> Self {
        self.map(|x| x.clone() * s.clone())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.clone() - b.clone())
            .collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> S {
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .fold(S::zero(), |acc, x| acc + x.abs())
            })
            .fold(S::zero(), max_of)
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        self.map(|x| x.to_f64())
    }

    pub fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].to_f64())
    }

    /// Row-reduces a copy of the matrix. Pivots are chosen by magnitude, and
    /// entries are treated as zero when `negligible` says so.
    fn eliminate(&self, negligible: impl Fn(&S) -> bool) -> (Self, Vec<usize>, bool) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut swapped = false;
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let best = (r..m.rows)
                .filter(|&i| !negligible(&m[(i, c)]))
                .max_by(|&i, &j| {
                    m[(i, c)]
                        .abs()
                        .partial_cmp(&m[(j, c)].abs())
                        .unwrap_or(std::cmp::Ordering::Equal)
                });
            let Some(p) = best else { continue };
            if p != r {
                m.swap_rows(p, r);
                swapped = !swapped;
            }
            for i in r + 1..m.rows {
                if m[(i, c)].is_zero() {
                    continue;
                }
                let f = m[(i, c)].clone() / m[(r, c)].clone();
                for j in c..m.cols {
                    let v = m[(i, j)].clone() - f.clone() * m[(r, j)].clone();
                    m[(i, j)] = v;
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots, swapped)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn determinant(&self) -> S {
        assert!(self.is_square());
        let (m, pivots, swapped) = self.eliminate(|x| x.is_zero());
        if pivots.len() < self.rows {
            return S::zero();
        }
        let det = (0..self.rows).fold(S::one(), |acc, i| acc * m[(i, i)].clone());
        if swapped {
            -det
        } else {
            det
        }
    }

    /// Solves `self * x = b` by Gaussian elimination.
    pub fn solve(&self, b: &[S]) -> Result<Vector<S>> {
        assert!(self.is_square());
        let n = self.rows;
        let mut aug = Self::zeros(n, n + 1);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, n)] = b[i].clone();
        }
        let (m, pivots, _) = aug.eliminate(|x| x.is_zero());
        if pivots.len() < n || pivots.iter().take(n).enumerate().any(|(i, &c)| c != i) {
            return Err(Error::Singular);
        }
        let mut x = vec![S::zero(); n];
        for i in (0..n).rev() {
            let mut acc = m[(i, n)].clone();
            for j in i + 1..n {
                acc = acc - m[(i, j)].clone() * x[j].clone();
            }
            x[i] = acc / m[(i, i)].clone();
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<Self> {
        let n = self.rows;
        let mut cols = Vec::with_capacity(n);
        for j in 0..n {
            let mut e = vec![S::zero(); n];
            e[j] = S::one();
            cols.push(self.solve(&e)?);
        }
        let mut inv = Self::zeros(n, n);
        for (j, col) in cols.into_iter().enumerate() {
            for (i, v) in col.into_iter().enumerate() {
                inv[(i, j)] = v;
            }
        }
        Ok(inv)
    }

    /// Matrix whose columns are `v, Mv, ..., M^{k-1} v`.
    pub fn krylov(&self, v: &[S], k: usize) -> Self {
        let n = self.rows;
        let mut out = Self::zeros(n, k);
        let mut cur = v.to_vec();
        for j in 0..k {
            for i in 0..n {
                out[(i, j)] = cur[i].clone();
            }
            cur = self.mul_vec(&cur);
        }
        out
    }
}

impl Matrix<Rational> {
    pub fn rank_exact(&self) -> usize {
        self.eliminate(|x| x.is_zero()).1.len()
    }
}

impl Matrix<f64> {
    /// Numerical rank: singular values above `tol * sigma_max`.
    pub fn rank_float(&self, tol: f64) -> usize {
        if self.rows == 0 || self.cols == 0 {
            return 0;
        }
        let sv = self.to_nalgebra().singular_values();
        let top = sv.iter().cloned().fold(0.0, f64::max);
        if top == 0.0 {
            return 0;
        }
        sv.iter().filter(|&&s| s > tol * top).count()
    }

    pub fn singular_values(&self) -> Vec<f64> {
        let mut sv: Vec<f64> = self.to_nalgebra().singular_values().iter().cloned().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        sv
    }
}

impl<S> std::ops::Index<(usize, usize)> for Matrix<S> {
    type Output = S;
    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.cols + j]
    }
}

impl<S> std::ops::IndexMut<(usize, usize)> for Matrix<S> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.data[i * self.cols + j]
    }
}

pub fn max_of<S: Scalar>(a: S, b: S) -> S {
    if b > a {
        b
    } else {
        a
    }
}

pub fn inf_norm_vec<S: Scalar>(v: &[S]) -> S {
    v.iter().map(Scalar::abs).fold(S::zero(), max_of)
}

pub fn add_vec<S: Scalar>(a: &[S], b: &[S]) -> Vector<S> {
    a.iter().zip(b).map(|(x, y)| x.clone() + y.clone()).collect()
}

pub fn sub_vec<S: Scalar>(a: &[S], b: &[S]) -> Vector<S> {
    a.iter().zip(b).map(|(x, y)| x.clone() - y.clone()).collect()
}

pub fn scale_vec<S: Scalar>(v: &[S], s: &S) -> Vector<S> {
    v.iter().map(|x| x.clone() * s.clone()).collect()
}

pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter()
        .zip(b)
        .fold(S::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

pub fn is_zero_vec<S: Scalar>(v: &[S]) -> bool {
    v.iter().all(Zero::is_zero)
}

pub fn unit<S: Scalar>(n: usize, i: usize) -> Vector<S> {
    let mut v = vec![S::zero(); n];
    v[i] = S::one();
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn m(rows: &[&[i64]]) -> Matrix<Rational> {
        Matrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| rat(x, 1)).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn determinant_and_inverse() {
        let a = m(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]);
        assert_eq!(a.determinant(), rat(18, 1));
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), Matrix::identity(3));
        let swap = m(&[&[0, 1], &[1, 0]]);
        assert_eq!(swap.determinant(), rat(-1, 1));
    }

    #[test]
    fn singular_systems_fail() {
        let a = m(&[&[1, 2], &[2, 4]]);
        assert_eq!(a.rank_exact(), 1);
        assert!(a.solve(&[rat(1, 1), rat(0, 1)]).is_err());
        assert_eq!(a.determinant(), rat(0, 1));
    }

    #[test]
    fn power_matches_repeated_product() {
        let a = m(&[&[1, 1], &[0, 1]]);
        assert_eq!(a.pow(5), m(&[&[1, 5], &[0, 1]]));
        assert_eq!(a.pow(0), Matrix::identity(2));
    }

    #[test]
    fn float_rank_uses_tolerance() {
        let a = Matrix::from_rows(vec![vec![1.0, 1.0], vec![1.0, 1.0 + 1e-14]]).unwrap();
        assert_eq!(a.rank_float(1e-9), 1);
        assert_eq!(a.rank_float(1e-16), 2);
    }
}
