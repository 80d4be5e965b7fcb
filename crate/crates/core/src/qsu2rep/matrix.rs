use std::ops::{Add, Mul, Sub};

use crate::qseries::C64;

/// Dense square complex matrix that tracks a bandwidth bound, so products
/// and matrix-vector products skip the structurally zero part.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    n: usize,
    band: usize,
    data: Vec<C64>,
}

impl CMat {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            band: 0,
            data: vec![C64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diag(&vec![C64::new(1.0, 0.0); n])
    }

    pub fn from_diag(d: &[C64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m.data[i * m.n + i] = v;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn band(&self) -> usize {
        self.band
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.band = self.band.max(i.abs_diff(j));
        self.data[i * self.n + j] = v;
    }

    fn cols(&self, i: usize) -> std::ops::Range<usize> {
        i.saturating_sub(self.band)..(i + self.band + 1).min(self.n)
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.n);
        out.band = self.band;
        for i in 0..self.n {
            for j in self.cols(i) {
                out.data[j * self.n + i] = self.get(i, j).conj();
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            n: self.n,
            band: self.band,
            data: self.data.iter().map(|&v| v * s).collect(),
        }
    }

    /// `(M + M^*) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let adj = self.adjoint();
        (self + &adj).scale(C64::new(0.5, 0.0))
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.n, "dimension mismatch in matvec");
        (0..self.n)
            .map(|i| self.cols(i).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    /// Largest entry modulus over the rows `rows`.
    pub fn max_abs_rows(&self, rows: std::ops::Range<usize>) -> f64 {
        rows.flat_map(|i| self.cols(i).map(move |j| (i, j)))
            .map(|(i, j)| self.get(i, j).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.max_abs_rows(0..self.n)
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }
}

impl<'a> Add<&'a CMat> for &'a CMat {
    type Output = CMat;
    fn add(self, rhs: &CMat) -> CMat {
        assert_eq!(self.n, rhs.n, "dimension mismatch in add");
        CMat {
            n: self.n,
            band: self.band.max(rhs.band),
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl<'a> Sub<&'a CMat> for &'a CMat {
    type Output = CMat;
    fn sub(self, rhs: &CMat) -> CMat {
        assert_eq!(self.n, rhs.n, "dimension mismatch in sub");
        CMat {
            n: self.n,
            band: self.band.max(rhs.band),
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl<'a> Mul<&'a CMat> for &'a CMat {
    type Output = CMat;
    fn mul(self, rhs: &CMat) -> CMat {
        assert_eq!(self.n, rhs.n, "dimension mismatch in mul");
        let n = self.n;
        let mut out = CMat::zeros(n);
        out.band = (self.band + rhs.band).min(n.saturating_sub(1));
        for i in 0..n {
            for k in self.cols(i) {
                let a = self.get(i, k);
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in rhs.cols(k) {
                    out.data[i * n + j] += a * rhs.get(k, j);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn banded_product_matches_dense() {
        let n = 6;
        let mut a = CMat::zeros(n);
        let mut b = CMat::zeros(n);
        for i in 0..n {
            a.set(i, i, c(i as f64, 1.0));
            if i + 1 < n {
                a.set(i, i + 1, c(0.5, -0.25 * i as f64));
                b.set(i + 1, i, c(1.0 + i as f64, 0.0));
            }
            b.set(i, i, c(0.0, 2.0));
        }
        let p = &a * &b;
        for i in 0..n {
            for j in 0..n {
                let want: C64 = (0..n).map(|k| a.get(i, k) * b.get(k, j)).sum();
                assert!((p.get(i, j) - want).norm() < 1e-14);
            }
        }
        assert_eq!(p.band(), 2);
        let v: Vec<C64> = (0..n).map(|i| c(1.0, i as f64)).collect();
        let pv = p.matvec(&v);
        let abv = a.matvec(&b.matvec(&v));
        for (x, y) in pv.iter().zip(&abv) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn adjoint_and_hermitian_part() {
        let mut a = CMat::zeros(3);
        a.set(0, 1, c(1.0, 2.0));
        a.set(2, 2, c(0.0, 1.0));
        let h = a.hermitian_part();
        assert_eq!(h.get(1, 0), c(0.5, -1.0));
        assert_eq!(h.get(2, 2), c(0.0, 0.0));
        assert_eq!(a.adjoint().adjoint(), a);
        assert_eq!(CMat::identity(4).trace(), c(4.0, 0.0));
    }
}
