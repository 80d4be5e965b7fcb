use std::fmt;

use serde::{Deserialize, Serialize};

/// Real polynomial in the monomial basis, lowest degree first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// `x^m`.
    pub fn monomial(m: usize) -> Self {
        let mut coeffs = vec![0.0; m + 1];
        coeffs[m] = 1.0;
        Self { coeffs }
    }

    /// `x^0, ..., x^max_degree`.
    pub fn monomials(max_degree: usize) -> Vec<Self> {
        (0..=max_degree).map(Self::monomial).collect()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    /// `p(s x)`.
    pub fn rescale(&self, s: f64) -> Self {
        let mut f = 1.0;
        let coeffs = self
            .coeffs
            .iter()
            .map(|&c| {
                let v = c * f;
                f *= s;
                v
            })
            .collect();
        Self::new(coeffs)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (m, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0.0 && !(m == 0 && first) {
                continue;
            }
            let mag = c.abs();
            if first {
                if c < 0.0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if c < 0.0 { '-' } else { '+' })?;
            }
            first = false;
            match (m, mag == 1.0) {
                (0, _) => write!(f, "{mag}")?,
                (1, true) => write!(f, "x")?,
                (1, false) => write!(f, "{mag}*x")?,
                (_, true) => write!(f, "x^{m}")?,
                (_, false) => write!(f, "{mag}*x^{m}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_and_eval() {
        let p = Poly::new(vec![1.0, 0.0, -2.0, 0.0]);
        assert_eq!(p.degree(), 2);
        assert_eq!(p.to_string(), "-2*x^2 + 1");
        assert_eq!(p.eval(3.0), -17.0);
        assert_eq!(Poly::monomial(1).to_string(), "x");
        assert_eq!(Poly::constant(0.0).to_string(), "0");
    }

    #[test]
    fn product_and_rescale() {
        let p = Poly::new(vec![1.0, 1.0]);
        let sq = p.mul(&p);
        assert_eq!(sq.coeffs(), &[1.0, 2.0, 1.0]);
        assert_eq!(sq.rescale(2.0).eval(1.0), 9.0);
    }
}
