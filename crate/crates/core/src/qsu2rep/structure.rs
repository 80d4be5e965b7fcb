use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qseries::{QContext, C64};

use super::{build_rep, eigen_norm_sq, eigenvector, element, CMat, EigenLabel, Element, TruncRep};

/// Rows this close to the cut are left out of every residual.
const BOUNDARY_ROWS: usize = 4;
/// Eigenvalue labels `Neg(k)`, `Pos(k)` with `k < LABELS` are checked.
const LABELS: usize = 4;

/// Largest residuals of the structural identities, each relative to the
/// norm of the vectors involved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    /// Defining relations of the algebra.
    pub commutation: f64,
    /// The factorisation of `2 q^{tau+sigma} rho_{tau,sigma} - q^{2 sigma-1} - q^{2 tau+1}`.
    pub factorization: f64,
    pub shift_alpha: f64,
    pub shift_beta: f64,
    pub shift_gamma: f64,
    pub shift_delta: f64,
    /// Three-term action of `rho_{tau,sigma}` on the eigenbasis.
    pub recursion: f64,
}

impl StructureReport {
    pub fn max(&self) -> f64 {
        [
            self.commutation,
            self.factorization,
            self.shift_alpha,
            self.shift_beta,
            self.shift_gamma,
            self.shift_delta,
            self.recursion,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `alpha_{tau,inf}, beta_{tau,inf}, gamma_{tau,inf}, delta_{tau,inf}`.
fn shifted_generators(rep: &TruncRep, tau: f64) -> [CMat; 4] {
    let q = rep.ctx.q();
    let (a, g) = (&rep.a, &rep.g);
    let (ad, gd) = (a.adjoint(), g.adjoint());
    let sq = q.sqrt();
    let qt = q.powf(tau);
    [
        &a.scale(c(sq, 0.0)) + &g.scale(c(0.0, qt * sq)),
        &gd.scale(c(0.0, sq)) + &ad.scale(c(qt / sq, 0.0)),
        &a.scale(c(-qt * sq, 0.0)) + &g.scale(c(0.0, sq)),
        &gd.scale(c(0.0, -qt * sq)) + &ad.scale(c(1.0 / sq, 0.0)),
    ]
}

/// `|| lhs - rhs ||` over interior rows, relative to the larger of `scale`
/// and `|| rhs ||`.
fn rel_residual(lhs: &[C64], rhs: &[C64], rows: usize, scale: f64) -> f64 {
    let r: f64 = lhs[..rows]
        .iter()
        .zip(&rhs[..rows])
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    let rhs_norm = rhs.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    r.sqrt() / scale.max(rhs_norm)
}

fn combine(terms: &[(C64, &[C64])], len: usize) -> Vec<C64> {
    let mut out = vec![c(0.0, 0.0); len];
    for (coef, v) in terms {
        for (o, x) in out.iter_mut().zip(v.iter()) {
            *o += coef * x;
        }
    }
    out
}

/// The label of `lambda * factor` at parameter `tau`, or `None` when the
/// corresponding coefficient in the shift formula vanishes.
fn shifted(lambda: f64, factor: f64, tau: f64, ctx: &QContext) -> Option<EigenLabel> {
    EigenLabel::from_lambda(lambda * factor, tau, ctx)
}

/// Residuals of the algebra relations, the factorisation of
/// `rho_{tau,sigma}`, the shift actions on the eigenbasis and the three-term
/// action of `rho_{tau,sigma}`, all on rows below `N - 4`.
pub fn verify_structure(
    tau: f64,
    sigma: f64,
    phi: f64,
    n: usize,
    ctx: &QContext,
) -> Result<StructureReport> {
    if n < 4 * BOUNDARY_ROWS {
        return Err(Error::InvalidParameter(format!(
            "structure checks need N >= {}, got {n}",
            4 * BOUNDARY_ROWS
        )));
    }
    let q = ctx.q();
    let rep = build_rep(phi, n, ctx)?;
    let dim = n + 1;
    let rows = dim - BOUNDARY_ROWS;
    let (a, g) = (&rep.a, &rep.g);
    let (ad, gd) = (a.adjoint(), g.adjoint());
    let id = CMat::identity(dim);

    let relations = [
        &(a * g) - &(g * a).scale(c(q, 0.0)),
        &(a * &gd) - &(&gd * a).scale(c(q, 0.0)),
        &(g * &gd) - &(&gd * g),
        &(&(&ad * a) + &(&gd * g)) - &id,
        &(&(a * &ad) + &(g * &gd).scale(c(q * q, 0.0))) - &id,
    ];
    let commutation = relations
        .iter()
        .map(|m| m.max_abs_rows(0..rows))
        .fold(0.0, f64::max);

    let rho = element(&rep, Element::RhoSigma { tau, sigma })?;
    let lhs = &rho.scale(c(2.0 * q.powf(tau + sigma), 0.0))
        - &id.scale(c(q.powf(2.0 * sigma - 1.0) + q.powf(2.0 * tau + 1.0), 0.0));
    let [al1, be1, _, _] = shifted_generators(&rep, tau + 1.0);
    let [_, _, ga0, de0] = shifted_generators(&rep, tau);
    let left = &be1 - &al1.scale(c(q.powf(sigma - 1.0), 0.0));
    let right = &ga0 + &de0.scale(c(q.powf(sigma), 0.0));
    let factorization = (&lhs - &(&left * &right)).max_abs_rows(0..rows);

    let [alpha, beta, gamma, delta] = shifted_generators(&rep, tau);
    let vec_of = |label: EigenLabel, t: f64| eigenvector(label, t, phi, n, ctx);
    let eiphi = C64::from_polar(1.0, phi);
    let i = c(0.0, 1.0);
    let sq = q.sqrt();
    let qt = q.powf(tau);
    let mut shift = [0.0f64; 4];
    let mut recursion = 0.0f64;
    for k in 0..LABELS {
        for label in [EigenLabel::Neg(k), EigenLabel::Pos(k)] {
            let lam = label.lambda(tau, ctx);
            let v = vec_of(label, tau);
            let scale = eigen_norm_sq(label, tau, ctx)?.sqrt();
            let zero = vec![c(0.0, 0.0); dim];
            let target = |factor: f64, t: f64| -> Vec<C64> {
                shifted(lam, factor, t, ctx).map_or_else(|| zero.clone(), |l| vec_of(l, t))
            };

            let want_a = combine(
                &[(
                    eiphi * i * (sq / qt) * (1.0 + lam),
                    &target(1.0 / (q * q), tau - 1.0),
                )],
                dim,
            );
            let want_b = combine(&[(eiphi.conj() * i * sq, &target(1.0, tau - 1.0))], dim);
            let want_g = combine(
                &[(eiphi * i * sq * (qt * qt - lam), &target(1.0, tau + 1.0))],
                dim,
            );
            let want_d = combine(
                &[(-eiphi.conj() * i * sq * qt, &target(q * q, tau + 1.0))],
                dim,
            );
            for (slot, (m, want)) in shift.iter_mut().zip([
                (&alpha, want_a),
                (&beta, want_b),
                (&gamma, want_g),
                (&delta, want_d),
            ]) {
                *slot = slot.max(rel_residual(&m.matvec(&v), &want, rows, scale));
            }

            let e2 = C64::from_polar(1.0, 2.0 * phi);
            let up = target(q * q, tau);
            let down = target(1.0 / (q * q), tau);
            let want = combine(
                &[
                    (e2.conj() * q, &up),
                    (e2 * ((1.0 - lam / (qt * qt)) * (1.0 + lam) / q), &down),
                    (c(lam * q / qt * (q.powf(-sigma) - q.powf(sigma)), 0.0), &v),
                ],
                dim,
            );
            let got: Vec<C64> = rho.matvec(&v).iter().map(|x| x * 2.0).collect();
            recursion = recursion.max(rel_residual(&got, &want, rows, scale));
        }
    }

    Ok(StructureReport {
        commutation,
        factorization,
        shift_alpha: shift[0],
        shift_beta: shift[1],
        shift_gamma: shift[2],
        shift_delta: shift[3],
        recursion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identities_hold_on_interior_rows() {
        let ctx = QContext::new(0.5).unwrap();
        let r = verify_structure(0.4, 0.6, 0.9, 150, &ctx).unwrap();
        assert!(r.commutation <= 1e-14, "{r:?}");
        assert!(r.factorization <= 1e-10, "{r:?}");
        for v in [
            r.shift_alpha,
            r.shift_beta,
            r.shift_gamma,
            r.shift_delta,
            r.recursion,
        ] {
            assert!(v <= 1e-9, "{r:?}");
        }
    }

    #[test]
    fn other_parameters() {
        let ctx = QContext::new(0.7).unwrap();
        let r = verify_structure(1.3, 0.25, 4.0, 150, &ctx).unwrap();
        assert!(r.max() <= 1e-9, "{r:?}");
    }

    #[test]
    fn small_truncation_rejected() {
        let ctx = QContext::new(0.5).unwrap();
        assert!(verify_structure(0.4, 0.6, 0.0, 8, &ctx).is_err());
    }
}
