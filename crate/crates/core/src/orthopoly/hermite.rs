use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::qseries::{qpoch_inf, qpoch_n, QContext};

use super::{angle, circle_pair};

/// Continuous q-Hermite polynomial `H_n(x|q)` by the upward recurrence
/// `2x H_n = H_{n+1} + (1 - q^n) H_{n-1}`.
pub fn cqh(n: usize, x: f64, ctx: &QContext) -> f64 {
    cqh_all(n, x, ctx)[n]
}

/// `H_0(x|q), ..., H_{n_max}(x|q)`.
pub fn cqh_all(n_max: usize, x: f64, ctx: &QContext) -> Vec<f64> {
    let q = ctx.q();
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(1.0);
    let (mut prev, mut qn) = (0.0, 1.0);
    for n in 0..n_max {
        let cur = out[n];
        let next = 2.0 * x * cur - (1.0 - qn) * prev;
        prev = cur;
        qn *= q;
        out.push(next);
    }
    out
}

/// Weight `w(cos theta|q) = (e^{2i theta}, e^{-2i theta}; q)_inf` on `[0, pi]`.
pub fn cqh_weight(theta: f64, ctx: &QContext) -> Result<f64> {
    circle_pair(1.0, 2.0 * theta, ctx)
}

/// `int_0^pi H_n^2 w dtheta = 2 pi (q;q)_n / (q;q)_inf`.
pub fn cqh_norm(n: usize, ctx: &QContext) -> Result<f64> {
    let q = ctx.q();
    Ok(2.0 * PI * qpoch_n(q, q, n) / qpoch_inf(q, ctx)?)
}

fn check_t(t: f64) -> Result<()> {
    if t.abs() < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "q-Hermite Poisson kernel",
            detail: format!("|t| = {} is not below 1", t.abs()),
        })
    }
}

/// Poisson kernel `sum_n H_n(x) H_n(y) t^n / (q;q)_n` in closed form,
/// `(t^2;q)_inf / (t e^{+-i(theta+psi)}, t e^{+-i(theta-psi)}; q)_inf`.
pub fn cqh_poisson(t: f64, x: f64, y: f64, ctx: &QContext) -> Result<f64> {
    check_t(t)?;
    let th = angle(x, "q-Hermite Poisson kernel")?;
    let ps = angle(y, "q-Hermite Poisson kernel")?;
    let den = circle_pair(t, th + ps, ctx)? * circle_pair(t, th - ps, ctx)?;
    Ok(qpoch_inf(t * t, ctx)? / den)
}

/// Partial sum of the defining series with `terms` terms.
pub fn cqh_poisson_series(t: f64, x: f64, y: f64, terms: usize, ctx: &QContext) -> Result<f64> {
    check_t(t)?;
    if terms == 0 {
        return Ok(0.0);
    }
    let q = ctx.q();
    let hx = cqh_all(terms - 1, x, ctx);
    let hy = cqh_all(terms - 1, y, ctx);
    let (mut sum, mut scale) = (0.0, 1.0);
    for n in 0..terms {
        if n > 0 {
            scale *= t / (1.0 - q.powi(n as i32));
        }
        sum += hx[n] * hy[n] * scale;
    }
    Ok(sum)
}
