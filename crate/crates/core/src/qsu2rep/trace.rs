use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::qseries::{QContext, C64};

use super::{build_rep, element, op_d, CMat, Element};

/// Largest imaginary part of the averaged trace tolerated before it is
/// treated as a bug.
const IMAG_LIMIT: f64 = 1e-8;

/// Uniform grid `phi_j = 2 pi j / m`, `j = 0..m`.
pub fn phi_grid(m: usize) -> Vec<f64> {
    (0..m).map(|j| 2.0 * PI * j as f64 / m as f64).collect()
}

/// `tr(D p(M))` for a banded hermitian `M`, column by column with Horner's
/// scheme so that only the band around `e_p` is touched.
fn weighted_trace(m: &CMat, p: &Poly, d: &[f64]) -> C64 {
    let dim = m.dim();
    let band = m.band();
    let coeffs = p.coeffs();
    let top = coeffs.len() - 1;
    let mut total = C64::new(0.0, 0.0);
    let mut w = vec![C64::new(0.0, 0.0); dim];
    let mut next = vec![C64::new(0.0, 0.0); dim];
    for col in 0..dim {
        let (mut lo, mut hi) = (col, col);
        w[col] = C64::new(coeffs[top], 0.0);
        for &c in coeffs[..top].iter().rev() {
            let (nlo, nhi) = (lo.saturating_sub(band), (hi + band).min(dim - 1));
            for i in nlo..=nhi {
                let jlo = i.saturating_sub(band).max(lo);
                let jhi = (i + band).min(hi);
                let mut acc = C64::new(0.0, 0.0);
                for j in jlo..=jhi {
                    acc += m.get(i, j) * w[j];
                }
                next[i] = acc;
            }
            for i in lo..=hi {
                w[i] = C64::new(0.0, 0.0);
            }
            for i in nlo..=nhi {
                w[i] = next[i];
                next[i] = C64::new(0.0, 0.0);
            }
            w[col] += c;
            lo = nlo;
            hi = nhi;
        }
        total += w[col] * d[col];
        for v in &mut w[lo..=hi] {
            *v = C64::new(0.0, 0.0);
        }
    }
    total
}

/// `tr(D p(pi_phi(element)))` on `span(e_0, ..., e_N)`.
pub fn trace_at_phi(which: Element, p: &Poly, phi: f64, n: usize, ctx: &QContext) -> Result<C64> {
    let rep = build_rep(phi, n, ctx)?;
    let m = element(&rep, which)?;
    Ok(weighted_trace(&m, p, &op_d(n, ctx)))
}

/// `(1 - q^2) / (2 pi) int_0^{2 pi} tr(D p(pi_phi(element))) dphi` with the
/// trapezoid rule on `phi_points` uniform nodes, exact for the
/// trigonometric polynomials that arise once `phi_points >= 4 deg(p) + 4`.
///
/// Grid points are evaluated in parallel and summed in grid order, so the
/// result does not depend on the thread count.
///
/// # Panics
///
/// If the averaged trace has an imaginary part above `1e-8`, which can only
/// come from a non-hermitian element matrix.
pub fn haar_trace(
    which: Element,
    p: &Poly,
    n: usize,
    phi_points: usize,
    ctx: &QContext,
) -> Result<f64> {
    let need = 4 * p.degree() + 4;
    if phi_points < need {
        return Err(Error::Precondition(format!(
            "phi grid of {phi_points} points is too coarse for degree {} (need {need})",
            p.degree()
        )));
    }
    let values: Vec<C64> = phi_grid(phi_points)
        .par_iter()
        .map(|&phi| trace_at_phi(which, p, phi, n, ctx))
        .collect::<Result<_>>()?;
    let mean = values.iter().sum::<C64>() / phi_points as f64;
    let q = ctx.q();
    let h = mean * (1.0 - q * q);
    assert!(
        h.im.abs() <= IMAG_LIMIT,
        "Haar trace has imaginary part {:e}; the element matrix is not hermitian",
        h.im
    );
    Ok(h.re)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_trace(which: Element, p: &Poly, phi: f64, n: usize, ctx: &QContext) -> C64 {
        let rep = build_rep(phi, n, ctx).unwrap();
        let m = element(&rep, which).unwrap();
        let mut acc = CMat::zeros(n + 1);
        let mut pow = CMat::identity(n + 1);
        for &c in p.coeffs() {
            acc = &acc + &pow.scale(C64::new(c, 0.0));
            pow = &pow * &m;
        }
        let d = op_d(n, ctx);
        (0..=n).map(|i| acc.get(i, i) * d[i]).sum()
    }

    #[test]
    fn banded_trace_matches_dense_powers() {
        let ctx = QContext::new(0.6).unwrap();
        let p = Poly::new(vec![0.3, -1.0, 0.5, 2.0, 0.0, 1.0]);
        for which in [
            Element::Cocentral,
            Element::RhoInf { tau: 0.4 },
            Element::RhoSigma {
                tau: 0.4,
                sigma: 0.6,
            },
        ] {
            let got = trace_at_phi(which, &p, 0.8, 30, &ctx).unwrap();
            let want = dense_trace(which, &p, 0.8, 30, &ctx);
            assert!(
                (got - want).norm() < 1e-12 * want.norm().max(1.0),
                "{which:?}"
            );
        }
    }

    #[test]
    fn normalisation_and_simple_moments() {
        let ctx = QContext::new(0.5).unwrap();
        let one = Poly::constant(1.0);
        let x = Poly::monomial(1);
        for which in [
            Element::Cocentral,
            Element::RhoInf { tau: 0.4 },
            Element::GammaStarGamma,
        ] {
            let h = haar_trace(which, &one, 60, 8, &ctx).unwrap();
            assert!((h - 1.0).abs() < 1e-14, "{which:?}: {h}");
        }
        let g = haar_trace(Element::GammaStarGamma, &x, 60, 8, &ctx).unwrap();
        assert!((g - 1.0 / 1.25).abs() < 1e-14);
        let c = haar_trace(Element::Cocentral, &x, 60, 8, &ctx).unwrap();
        assert!(c.abs() < 1e-15);
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let ctx = QContext::new(0.5).unwrap();
        let err = haar_trace(Element::Cocentral, &Poly::monomial(3), 40, 15, &ctx).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    fn phi_variance(which: Element, deg: usize, ctx: &QContext) -> (f64, C64) {
        let p = Poly::monomial(deg);
        let vals: Vec<C64> = phi_grid(4 * deg + 4)
            .iter()
            .map(|&phi| trace_at_phi(which, &p, phi, 80, ctx).unwrap())
            .collect();
        let mean = vals.iter().sum::<C64>() / vals.len() as f64;
        let var = vals.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() / vals.len() as f64;
        (var, mean)
    }

    #[test]
    fn traces_do_not_depend_on_phi() {
        let ctx = QContext::new(0.5).unwrap();
        for which in [Element::Cocentral, Element::RhoInf { tau: 0.4 }] {
            for deg in 0..=6 {
                let (var, mean) = phi_variance(which, deg, &ctx);
                assert!(
                    var <= 1e-10 * (1.0 + mean.norm()),
                    "{which:?} deg {deg}: {var}"
                );
            }
        }
    }

    #[test]
    fn rho_sigma_trace_depends_on_phi_but_grid_is_exact() {
        let ctx = QContext::new(0.5).unwrap();
        let which = Element::RhoSigma {
            tau: 0.4,
            sigma: 0.6,
        };
        let (var, _) = phi_variance(which, 1, &ctx);
        assert!(var > 1e-3);
        for deg in 1..=6 {
            let p = Poly::monomial(deg);
            let coarse = haar_trace(which, &p, 80, 4 * deg + 4, &ctx).unwrap();
            let fine = haar_trace(which, &p, 80, 8 * deg + 11, &ctx).unwrap();
            assert!(
                (coarse - fine).abs() <= 1e-13,
                "deg {deg}: {coarse} vs {fine}"
            );
        }
    }
}
