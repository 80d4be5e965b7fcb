use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::qseries::{qpoch_inf, qpoch_n, QContext};

/// q-Charlier polynomial `c_n(x; a; q) = 2phi1(q^{-n}, x; 0; q, -q^{n+1}/a)`
/// in base `ctx.q()`.
///
/// Summed as `sum_j [n, j]_q q^{j(j+1)/2} a^{-j} (x;q)_j`, which is the same
/// series with `(q^{-n};q)_j (-q^{n+1})^j` folded into a positive coefficient.
pub fn q_charlier(n: usize, x: f64, a: f64, ctx: &QContext) -> f64 {
    let q = ctx.q();
    let (mut sum, mut coef, mut xpoch) = (1.0, 1.0, 1.0);
    for j in 1..=n {
        let j1 = j as i32 - 1;
        // [n, j] / [n, j-1] = (1 - q^{n-j+1}) / (1 - q^j)
        coef *= (1.0 - q.powi(n as i32 - j1)) / (1.0 - q.powi(j as i32)) * q.powi(j as i32) / a;
        xpoch *= 1.0 - x * q.powi(j1);
        sum += coef * xpoch;
    }
    sum
}

/// `L(c_k^2)` for `c_k(.; q^{2 tau}; q^2)`:
/// `q^{-2k} (q^2, -q^{2-2 tau}; q^2)_k (-q^{2 tau}; q^2)_inf`.
pub fn charlier_norm(k: usize, tau: f64, ctx: &QContext) -> Result<f64> {
    let ctx2 = ctx.squared();
    let q2 = ctx2.q();
    Ok(q2.powi(-(k as i32))
        * qpoch_n(q2, q2, k)
        * qpoch_n(-ctx.pow(2.0 - 2.0 * tau), q2, k)
        * qpoch_inf(-ctx.pow(2.0 * tau), &ctx2)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MomentKind {
    /// Weights `q^{2n tau} q^{n(n-1)} / (q^2;q^2)_n`.
    L { tau: f64 },
    /// Weights `(-1)^n q^{n(n-1)} / (q^2;q^2)_n`.
    M,
}

/// Discrete functional `p -> sum_n w_n p(q^{-2n})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentFunctional {
    pub kind: MomentKind,
    pub ctx: QContext,
}

impl MomentFunctional {
    pub fn l(tau: f64, ctx: QContext) -> Self {
        Self {
            kind: MomentKind::L { tau },
            ctx,
        }
    }

    pub fn m(ctx: QContext) -> Self {
        Self {
            kind: MomentKind::M,
            ctx,
        }
    }

    pub fn apply(&self, p: &Poly) -> Result<f64> {
        let bound: f64 = p.coeffs().iter().map(|c| c.abs()).sum();
        self.sum(|x| p.eval(x), p.degree(), Some(bound))
    }

    /// `f` must satisfy `|f(x)| <= C x^degree` for `x >= 1`; `C` is estimated
    /// from the two most recent samples.
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64, degree: usize) -> Result<f64> {
        self.sum(f, degree, None)
    }

    fn sum(&self, f: impl Fn(f64) -> f64, degree: usize, bound: Option<f64>) -> Result<f64> {
        let ctx = &self.ctx;
        if degree > ctx.max_terms() {
            return Err(Error::Precondition(format!(
                "degree {degree} exceeds the term cap {}",
                ctx.max_terms()
            )));
        }
        let (shift, alternating) = match self.kind {
            MomentKind::L { tau } => (2.0 * tau, false),
            MomentKind::M => (0.0, true),
        };
        let lq = ctx.q().ln();
        let d = degree as f64;
        let mut log_w = 0.0;
        let mut sum = 0.0;
        let mut prev_scaled = 0.0f64;
        for n in 0..ctx.max_terms() {
            let nf = n as f64;
            let log_x = -2.0 * nf * lq;
            let fx = f(log_x.exp());
            if !fx.is_finite() {
                return Err(Error::Domain {
                    what: "moment functional",
                    detail: format!("integrand is not finite at q^(-2*{n})"),
                });
            }
            let sign = if alternating && n % 2 == 1 { -1.0 } else { 1.0 };
            if fx != 0.0 {
                sum += sign * fx.signum() * (log_w + fx.abs().ln()).exp();
            }
            // w_{n+1} / w_n = q^{shift + 2n} / (1 - q^{2n+2})
            let log_w_next =
                log_w + (shift + 2.0 * nf) * lq - (-(2.0 * (nf + 1.0) * lq).exp()).ln_1p();
            let scaled = (fx.abs().ln() - d * log_x).exp();
            let c = bound.unwrap_or(scaled.max(prev_scaled));
            prev_scaled = scaled;
            // envelope E_m = w_m x_m^d; ratio E_{m+1}/E_m for m = n + 1
            let log_ratio = (shift + 2.0 * (nf + 1.0) - 2.0 * d) * lq
                - (-(2.0 * (nf + 2.0) * lq).exp()).ln_1p();
            if log_ratio < -std::f64::consts::LN_2 && n > degree {
                let log_env = log_w_next + d * (-2.0 * (nf + 1.0) * lq);
                let tail = 2.0 * c * log_env.exp();
                if tail <= ctx.tail_tol() * sum.abs().max(1.0) {
                    return Ok(sum);
                }
            }
            log_w = log_w_next;
        }
        Err(Error::NonConvergence {
            what: "moment functional",
            terms: ctx.max_terms(),
            tol: ctx.tail_tol(),
        })
    }
}
