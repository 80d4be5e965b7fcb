//! The polynomial families behind the three Haar measures: continuous
//! q-Hermite, q-Charlier, Al-Salam-Chihara, and the Askey-Wilson measure
//! (continuous part plus discrete masses), with the two Poisson kernels.

mod askey_wilson;
mod charlier;
mod chihara;
mod hermite;

pub use askey_wilson::{
    aw_jacobi, aw_mass_weight, aw_measure, aw_weight, AWParams, MassPoint, MeasureSpec,
};
pub use charlier::{charlier_norm, q_charlier, MomentFunctional, MomentKind};
pub use chihara::{
    asc, asc_3phi2, asc_all, asc_jacobi, asc_mass_kernel, asc_norm, asc_poisson,
    asc_poisson_series, Phi32Value,
};
pub use hermite::{cqh, cqh_all, cqh_norm, cqh_poisson, cqh_poisson_series, cqh_weight};

use crate::error::{Error, Result};
use crate::qseries::QContext;

/// `(a e^{i theta}, a e^{-i theta}; q)_inf = prod_k |1 - a q^k e^{i theta}|^2`
/// for real `a`, each factor written as a sum of non-negative terms so that
/// zeros of the product are resolved to full relative precision.
pub(crate) fn circle_pair(a: f64, theta: f64, ctx: &QContext) -> Result<f64> {
    let q = ctx.q();
    let cutoff = ctx.tail_tol() * (1.0 - q);
    let sin2 = (0.5 * theta).sin().powi(2);
    let cos2 = (0.5 * theta).cos().powi(2);
    let mut acc = 1.0;
    let mut s = a;
    for _ in 0..ctx.max_terms() {
        if s.abs() < cutoff {
            return Ok(acc);
        }
        acc *= if s >= 0.0 {
            (1.0 - s).powi(2) + 4.0 * s * sin2
        } else {
            (1.0 + s).powi(2) - 4.0 * s * cos2
        };
        s *= q;
    }
    Err(Error::NonConvergence {
        what: "circle product",
        terms: ctx.max_terms(),
        tol: ctx.tail_tol(),
    })
}

/// `theta = arccos x` for `|x| <= 1`.
pub(crate) fn angle(x: f64, what: &'static str) -> Result<f64> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::Domain {
            what,
            detail: format!("x = {x} lies outside [-1, 1]"),
        });
    }
    Ok(x.acos())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qseries::{qpoch, Order, C64};
    use approx::assert_relative_eq;

    #[test]
    fn circle_pair_matches_complex_products() {
        let ctx = QContext::new(0.6).unwrap();
        for &(a, th) in &[(0.7, 0.3), (-0.9, 2.5), (1.4, 1.0), (0.0, 1.0)] {
            let z = C64::from_polar(a, th);
            let want = (qpoch(z, &ctx, Order::Infinite).unwrap()
                * qpoch(z.conj(), &ctx, Order::Infinite).unwrap())
            .re;
            assert_relative_eq!(
                circle_pair(a, th, &ctx).unwrap(),
                want,
                max_relative = 1e-13
            );
        }
    }

    #[test]
    fn circle_pair_zero_factor() {
        let ctx = QContext::new(0.5).unwrap();
        assert_eq!(circle_pair(1.0, 0.0, &ctx).unwrap(), 0.0);
        assert!(circle_pair(-1.0, std::f64::consts::PI, &ctx).unwrap() < 1e-30);
    }
}
