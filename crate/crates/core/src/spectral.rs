//! Jacobi matrices and their spectral measures.
//!
//! A Jacobi matrix acts as `J e_n = a_{n+1} e_{n+1} + b_n e_n + a_n e_{n-1}`
//! with `a_n > 0`. Its spectral measure at `e_0` is the orthogonality measure
//! of the orthonormal polynomials `x p_n = a_{n+1} p_{n+1} + b_n p_n + a_n p_{n-1}`,
//! and the map `e_n -> p_n` intertwines `J` with multiplication by `x`.
//!
//! Finite sections are diagonalised by an implicit-shift QL iteration that
//! carries only the first row of the eigenvector matrix along, which is all
//! that is needed for the discretised measure (`O(N^2)` work instead of
//! `O(N^3)`).
//!
//! Truncation policy: for a degree-`d` polynomial weighted by `D = diag(q^{2p})`
//! the rows `p > N - d` are the only ones that see the truncation boundary, so
//! `N >= d + ceil(ln(tol) / (2 ln q))` keeps the discarded weight below `tol`.

use crate::error::{Error, Result};

/// Maximum QL sweeps spent on one eigenvalue.
pub const MAX_QL_ITERATIONS: usize = 60;

pub struct JacobiCoeffs {
    a: Box<dyn Fn(usize) -> f64 + Send + Sync>,
    b: Box<dyn Fn(usize) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for JacobiCoeffs {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("JacobiCoeffs")
            .field("a_1", &(self.a)(1))
            .field("b_0", &(self.b)(0))
            .finish()
    }
}

impl JacobiCoeffs {
    /// `a(n)` is queried for `n >= 1`, `b(n)` for `n >= 0`.
    pub fn new(
        a: impl Fn(usize) -> f64 + Send + Sync + 'static,
        b: impl Fn(usize) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            a: Box::new(a),
            b: Box::new(b),
        }
    }

    pub fn a(&self, n: usize) -> f64 {
        (self.a)(n)
    }

    pub fn b(&self, n: usize) -> f64 {
        (self.b)(n)
    }

    /// The `(N+1) x (N+1)` section on `e_0, ..., e_N`.
    pub fn truncate(&self, n: usize) -> Result<SymTridiag> {
        let diag: Vec<f64> = (0..=n).map(|k| self.b(k)).collect();
        let off: Vec<f64> = (1..=n).map(|k| self.a(k)).collect();
        if let Some((k, &v)) = off.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "Jacobi coefficient a_{} = {v} is not positive",
                k + 1
            )));
        }
        Ok(SymTridiag { diag, off })
    }

    /// `p_0(x), ..., p_{n_max}(x)` for the orthonormal polynomials.
    pub fn orthonormal_polys(&self, n_max: usize, x: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(n_max + 1);
        out.push(1.0);
        let mut prev = 0.0;
        for n in 0..n_max {
            let cur = out[n];
            let a_n = if n == 0 { 0.0 } else { self.a(n) };
            let next = ((x - self.b(n)) * cur - a_n * prev) / self.a(n + 1);
            prev = cur;
            out.push(next);
        }
        out
    }
}

/// Real symmetric tridiagonal matrix; `off[i]` couples rows `i` and `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::InvalidParameter(format!(
                "tridiagonal shape mismatch: {} diagonal and {} off-diagonal entries",
                diag.len(),
                off.len()
            )));
        }
        Ok(Self { diag, off })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            m[i][i] = self.diag[i];
            if i + 1 < n {
                m[i][i + 1] = self.off[i];
                m[i + 1][i] = self.off[i];
            }
        }
        m
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * v[i];
                if i > 0 {
                    s += self.off[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    s += self.off[i] * v[i + 1];
                }
                s
            })
            .collect()
    }
}

/// Discretised spectral measure of a finite section at `e_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl SpectralData {
    /// `sum_i w_i f(x_i)`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Full eigendecomposition: ascending eigenvalues and unit eigenvectors
/// (`vectors[j]` belongs to `values[j]`).
#[derive(Debug, Clone, PartialEq)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

/// Eigenvalues and squared first eigenvector components.
pub fn eig(t: &SymTridiag) -> Result<SpectralData> {
    let n = t.dim();
    let mut first = vec![0.0; n];
    first[0] = 1.0;
    let mut rows = vec![first];
    let values = ql_implicit(t, &mut rows)?;
    let mut pairs: Vec<(f64, f64)> = values
        .into_iter()
        .zip(rows.pop().unwrap())
        .map(|(x, z)| (x, z * z))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (nodes, weights) = pairs.into_iter().unzip();
    Ok(SpectralData { nodes, weights })
}

/// Eigenvalues together with complete eigenvectors.
pub fn eig_full(t: &SymTridiag) -> Result<Eigen> {
    let n = t.dim();
    let mut rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut r = vec![0.0; n];
            r[i] = 1.0;
            r
        })
        .collect();
    let values = ql_implicit(t, &mut rows)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    Ok(Eigen {
        values: order.iter().map(|&j| values[j]).collect(),
        vectors: order
            .iter()
            .map(|&j| rows.iter().map(|r| r[j]).collect())
            .collect(),
    })
}

/// Implicit-shift QL on a copy of `t`. The plane rotations are applied to the
/// columns of the row vectors in `rows`, so starting from rows of the identity
/// yields the matching rows of the eigenvector matrix.
fn ql_implicit(t: &SymTridiag, rows: &mut [Vec<f64>]) -> Result<Vec<f64>> {
    let n = t.dim();
    let mut d = t.diag.clone();
    let mut e = t.off.clone();
    e.push(0.0);

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_ITERATIONS {
                return Err(Error::NonConvergence {
                    what: "tridiagonal QL eigenvalue iteration",
                    terms: MAX_QL_ITERATIONS,
                    tol: f64::EPSILON,
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for row in rows.iter_mut() {
                    let f = row[i + 1];
                    row[i + 1] = s * row[i] + c * f;
                    row[i] = c * row[i] - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(d)
}

/// Smallest section size for a degree-`degree` test weighted by `q^{2p}`.
pub fn required_truncation(degree: usize, q: f64, tol: f64) -> usize {
    degree + (tol.ln() / (2.0 * q.ln())).ceil().max(0.0) as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn hermite_q2(q: f64) -> JacobiCoeffs {
        JacobiCoeffs::new(move |n| (1.0 - q.powi(2 * n as i32)).sqrt() / 2.0, |_| 0.0)
    }

    #[test]
    fn truncate_examples() {
        let q: f64 = 0.5;
        let t = hermite_q2(q).truncate(1).unwrap();
        assert_eq!(t.diag, vec![0.0, 0.0]);
        assert_eq!(t.off, vec![0.75f64.sqrt() / 2.0]);

        let t0 = JacobiCoeffs::new(|_| 1.0, |_| 0.3).truncate(0).unwrap();
        assert_eq!(t0.to_dense(), vec![vec![0.3]]);
    }

    #[test]
    fn truncate_rejects_non_positive() {
        let j = JacobiCoeffs::new(|n| if n == 2 { 0.0 } else { 1.0 }, |_| 0.0);
        assert!(j.truncate(3).is_err());
    }

    #[test]
    fn chebyshev_three_by_three() {
        let t = JacobiCoeffs::new(|_| 0.5, |_| 0.0).truncate(2).unwrap();
        let sd = eig(&t).unwrap();
        let r = 0.5f64.sqrt();
        for (x, want) in sd.nodes.iter().zip([-r, 0.0, r]) {
            assert!((x - want).abs() < 1e-15);
        }
    }

    #[test]
    fn two_by_two() {
        let a = 0.7;
        let sd = eig(&SymTridiag::new(vec![0.0, 0.0], vec![a]).unwrap()).unwrap();
        assert_relative_eq!(sd.nodes[0], -a, max_relative = 1e-15);
        assert_relative_eq!(sd.nodes[1], a, max_relative = 1e-15);
        assert_relative_eq!(sd.weights[0], 0.5, max_relative = 1e-14);
        assert_relative_eq!(sd.weights[1], 0.5, max_relative = 1e-14);
    }

    #[test]
    fn orthonormal_poly_seeds() {
        let j = JacobiCoeffs::new(|n| 0.3 + n as f64, |n| 0.1 * n as f64 - 0.2);
        let p = j.orthonormal_polys(3, 0.9);
        assert_eq!(p[0], 1.0);
        assert_relative_eq!(p[1], (0.9 - (-0.2)) / 1.3, max_relative = 1e-15);
    }

    #[test]
    fn gauss_quadrature_exactness() {
        let q: f64 = 0.5;
        let j = hermite_q2(q);
        let n = 60;
        let sd = eig(&j.truncate(n).unwrap()).unwrap();
        let half = n / 2;
        let polys: Vec<Vec<f64>> = sd
            .nodes
            .iter()
            .map(|&x| j.orthonormal_polys(half, x))
            .collect();
        for a in 0..=half {
            for b in 0..=half {
                let g: f64 = polys
                    .iter()
                    .zip(&sd.weights)
                    .map(|(p, &w)| w * p[a] * p[b])
                    .sum();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((g - want).abs() < 1e-9, "({a},{b}) -> {g}");
            }
        }
    }

    #[test]
    fn full_vectors_diagonalise() {
        let t = JacobiCoeffs::new(|n| 1.0 / (n as f64), |n| (n as f64).sin())
            .truncate(12)
            .unwrap();
        let full = eig_full(&t).unwrap();
        let sd = eig(&t).unwrap();
        for (j, v) in full.vectors.iter().enumerate() {
            let tv = t.matvec(v);
            for (a, b) in tv.iter().zip(v) {
                assert!((a - full.values[j] * b).abs() < 1e-13);
            }
            assert!((v[0] * v[0] - sd.weights[j]).abs() < 1e-14);
        }
    }

    #[test]
    fn interlacing() {
        let j = JacobiCoeffs::new(|n| (1.0 + 0.3 / n as f64).sqrt(), |n| 0.5f64.powi(n as i32));
        for n in [5, 11, 20] {
            let small = eig(&j.truncate(n).unwrap()).unwrap().nodes;
            let big = eig(&j.truncate(n + 1).unwrap()).unwrap().nodes;
            for i in 0..small.len() {
                assert!(big[i] <= small[i] && small[i] <= big[i + 1]);
            }
        }
    }

    #[test]
    fn truncation_policy() {
        assert_eq!(required_truncation(6, 0.5, 1e-7), 6 + 12);
        assert!(required_truncation(6, 0.99, 1e-7) > 800);
    }

    proptest! {
        #[test]
        fn moment_identities(
            diag in proptest::collection::vec(-2.0f64..2.0, 1..30),
            seed_off in proptest::collection::vec(0.05f64..2.0, 30),
        ) {
            let off = seed_off[..diag.len() - 1].to_vec();
            let t = SymTridiag::new(diag.clone(), off).unwrap();
            let sd = eig(&t).unwrap();
            let total: f64 = sd.weights.iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            prop_assert!((sd.integrate(|x| x) - diag[0]).abs() < 1e-12);
            prop_assert!(sd.weights.iter().all(|&w| w >= 0.0));
        }

        #[test]
        fn spectral_theorem_for_polynomials(
            diag in proptest::collection::vec(-1.0f64..1.0, 8..20),
            seed_off in proptest::collection::vec(0.1f64..1.0, 20),
            coeffs in proptest::collection::vec(-1.0f64..1.0, 1..8),
        ) {
            let off = seed_off[..diag.len() - 1].to_vec();
            let t = SymTridiag::new(diag, off).unwrap();
            let sd = eig(&t).unwrap();
            // <f(T) e_0, e_0> via Horner on vectors.
            let mut v = vec![0.0; t.dim()];
            for &c in coeffs.iter().rev() {
                v = t.matvec(&v);
                v[0] += c;
            }
            let lhs = v[0];
            let rhs = sd.integrate(|x| coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c));
            prop_assert!((lhs - rhs).abs() < 1e-11);
        }
    }
}
