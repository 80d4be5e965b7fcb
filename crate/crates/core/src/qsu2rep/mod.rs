//! Truncated matrices of the infinite-dimensional representations `pi_phi`
//! of quantum SU(2), the spherical elements, the weight operator `D`, the
//! trace formula for the Haar functional and the explicit eigenbasis of
//! `pi_phi(rho_{tau,inf})`.
//!
//! The representation space is cut to `span(e_0, ..., e_N)`. Rows near `N`
//! see the cut, so identities are checked on interior rows only.

mod eigen;
mod matrix;
mod structure;
mod trace;

pub use eigen::{
    d_coeff, eigen_basis, eigen_coeffs, eigen_coeffs_by_form, eigen_norm_sq, eigenvector, DCase,
    EigenBasisEntry, EigenLabel, FormValue,
};
pub use matrix::CMat;
pub use structure::{verify_structure, StructureReport};
pub use trace::{haar_trace, phi_grid, trace_at_phi};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qseries::{QContext, C64};
use crate::spectral::SymTridiag;

/// `pi_phi(alpha)` and `pi_phi(gamma)` on `span(e_0, ..., e_N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncRep {
    pub n: usize,
    pub phi: f64,
    pub ctx: QContext,
    pub a: CMat,
    pub g: CMat,
}

/// `alpha e_n = sqrt(1 - q^{2n}) e_{n-1}`, `gamma e_n = e^{i phi} q^n e_n`.
pub fn build_rep(phi: f64, n: usize, ctx: &QContext) -> Result<TruncRep> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "truncation N must be at least 2, got {n}"
        )));
    }
    let q = ctx.q();
    let dim = n + 1;
    let mut a = CMat::zeros(dim);
    for k in 1..dim {
        a.set(k - 1, k, C64::new((1.0 - q.powi(2 * k as i32)).sqrt(), 0.0));
    }
    let diag: Vec<C64> = (0..dim)
        .map(|k| C64::from_polar(q.powi(k as i32), phi))
        .collect();
    Ok(TruncRep {
        n,
        phi,
        ctx: *ctx,
        a,
        g: CMat::from_diag(&diag),
    })
}

/// Diagonal of `D e_p = q^{2p} e_p`, `p = 0..=N`.
pub fn op_d(n: usize, ctx: &QContext) -> Vec<f64> {
    let q2 = ctx.q() * ctx.q();
    (0..=n).map(|p| q2.powi(p as i32)).collect()
}

/// Self-adjoint elements whose generated subalgebras are studied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Element {
    /// `(alpha + alpha^*) / 2`.
    Cocentral,
    /// `i q^tau (alpha^* gamma - gamma^* alpha) - (1 - q^{2 tau}) gamma^* gamma`.
    RhoInf { tau: f64 },
    /// The two-parameter spherical element.
    RhoSigma { tau: f64, sigma: f64 },
    /// `gamma^* gamma`.
    GammaStarGamma,
}

impl Element {
    pub fn check(&self) -> Result<()> {
        let finite = match *self {
            Element::RhoInf { tau } => tau.is_finite(),
            Element::RhoSigma { tau, sigma } => tau.is_finite() && sigma.is_finite(),
            _ => true,
        };
        if finite {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "element parameters must be finite: {self:?}"
            )))
        }
    }
}

/// Matrix of the element in the truncated representation, made exactly
/// hermitian by taking `(M + M^*) / 2`.
pub fn element(rep: &TruncRep, which: Element) -> Result<CMat> {
    which.check()?;
    let q = rep.ctx.q();
    let c = |re: f64, im: f64| C64::new(re, im);
    let (a, g) = (&rep.a, &rep.g);
    let (ad, gd) = (a.adjoint(), g.adjoint());
    let m = match which {
        Element::Cocentral => (a + &ad).scale(c(0.5, 0.0)),
        Element::GammaStarGamma => &gd * g,
        Element::RhoInf { tau } => {
            let qt = q.powf(tau);
            let comm = &(&ad * g) - &(&gd * a);
            &comm.scale(c(0.0, qt)) - &(&gd * g).scale(c(1.0 - qt * qt, 0.0))
        }
        Element::RhoSigma { tau, sigma } => {
            let s = q.powf(-sigma) - q.powf(sigma);
            let t = q.powf(-tau) - q.powf(tau);
            let mut acc = &(a * a) + &(&ad * &ad);
            acc = &acc + &(&(g * g) + &(&gd * &gd)).scale(c(q, 0.0));
            acc = &acc + &(&(&ad * g) - &(&gd * a)).scale(c(0.0, q * s));
            acc = &acc - &(&(g * a) - &(&ad * &gd)).scale(c(0.0, q * t));
            acc = &acc - &(&gd * g).scale(c(q * s * t, 0.0));
            acc.scale(c(0.5, 0.0))
        }
    };
    Ok(m.hermitian_part())
}

/// `pi_phi(rho_{tau,inf})` conjugated by `diag(i^n e^{i n phi})`: the real
/// Jacobi matrix with diagonal `-(1 - q^{2 tau}) q^{2n}` and off-diagonal
/// `q^{tau+n} sqrt(1 - q^{2n+2})`.
pub fn rho_inf_tridiag(tau: f64, n: usize, ctx: &QContext) -> Result<SymTridiag> {
    let q = ctx.q();
    let qt = q.powf(tau);
    let diag = (0..=n)
        .map(|k| -(1.0 - qt * qt) * q.powi(2 * k as i32))
        .collect();
    let off = (0..n)
        .map(|k| qt * q.powi(k as i32) * (1.0 - q.powi(2 * k as i32 + 2)).sqrt())
        .collect();
    SymTridiag::new(diag, off)
}

/// `pi_phi((alpha + alpha^*) / 2)`: zero diagonal, off-diagonal
/// `sqrt(1 - q^{2n+2}) / 2`.
pub fn cocentral_tridiag(n: usize, ctx: &QContext) -> Result<SymTridiag> {
    let q = ctx.q();
    let off = (0..n)
        .map(|k| 0.5 * (1.0 - q.powi(2 * k as i32 + 2)).sqrt())
        .collect();
    SymTridiag::new(vec![0.0; n + 1], off)
}
