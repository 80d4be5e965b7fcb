//! Gauss rules for the continuous parts of the measures.

use std::f64::consts::PI;

use crate::error::Result;
use crate::spectral::{eig, JacobiCoeffs};

/// Nodes and weights of a quadrature rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// `n`-point Gauss-Legendre rule on `[lo, hi]`, from the Legendre Jacobi
/// matrix (`a_k = k / sqrt(4k^2 - 1)`, `b_k = 0`).
pub fn gauss_legendre(n: usize, lo: f64, hi: f64) -> Result<Rule> {
    assert!(n >= 1, "a quadrature rule needs at least one node");
    let jac = JacobiCoeffs::new(
        |k| {
            let k = k as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        },
        |_| 0.0,
    );
    let sd = eig(&jac.truncate(n - 1)?)?;
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    Ok(Rule {
        nodes: sd.nodes.iter().map(|&x| mid + half * x).collect(),
        weights: sd.weights.iter().map(|&w| 2.0 * half * w).collect(),
    })
}

/// `n`-point Gauss rule for `int_{-1}^{1} f(x) sqrt(1 - x^2) dx`; exact for
/// polynomials of degree `<= 2n - 1`.
pub fn gauss_chebyshev_u(n: usize) -> Rule {
    let h = PI / (n as f64 + 1.0);
    let (nodes, weights) = (1..=n)
        .map(|i| {
            let t = i as f64 * h;
            (t.cos(), h * t.sin().powi(2))
        })
        .unzip();
    Rule { nodes, weights }
}
