use crate::error::{Error, Result};
use crate::qseries::{
    qpoch_inf, qpoch_n, qpoch_prod, terminating_index, w87, Order, QContext, C64,
};
use crate::spectral::JacobiCoeffs;

use super::{angle, circle_pair};

/// Al-Salam-Chihara `p_0, ..., p_{n_max}` at `x` from
/// `2x p_n = p_{n+1} + (a+b) q^n p_n + (1 - ab q^{n-1})(1 - q^n) p_{n-1}`.
pub fn asc_all(n_max: usize, x: f64, a: f64, b: f64, ctx: &QContext) -> Vec<f64> {
    let q = ctx.q();
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(1.0);
    let (mut prev, mut qn) = (0.0, 1.0);
    for n in 0..n_max {
        let cur = out[n];
        let back = if n == 0 {
            0.0
        } else {
            (1.0 - a * b * qn / q) * (1.0 - qn)
        };
        let next = (2.0 * x - (a + b) * qn) * cur - back * prev;
        prev = cur;
        qn *= q;
        out.push(next);
    }
    out
}

/// `p_n(x; a, b | q)` by the three-term recurrence.
pub fn asc(n: usize, x: f64, a: f64, b: f64, ctx: &QContext) -> f64 {
    asc_all(n, x, a, b, ctx)[n]
}

/// `(q, ab; q)_n`, the squared norm of `p_n` in the normalised measure.
pub fn asc_norm(n: usize, a: f64, b: f64, ctx: &QContext) -> f64 {
    let q = ctx.q();
    qpoch_n(q, q, n) * qpoch_n(a * b, q, n)
}

/// Jacobi coefficients of the orthonormal Al-Salam-Chihara polynomials:
/// `a_n = sqrt((1 - ab q^{n-1})(1 - q^n)) / 2`, `b_n = (a + b) q^n / 2`.
pub fn asc_jacobi(a: f64, b: f64, ctx: &QContext) -> JacobiCoeffs {
    let q = ctx.q();
    JacobiCoeffs::new(
        move |n| {
            let qn = q.powi(n as i32);
            0.5 * ((1.0 - a * b * qn / q) * (1.0 - qn)).sqrt()
        },
        move |n| 0.5 * (a + b) * q.powi(n as i32),
    )
}

/// Value of the `3 phi 2` representation together with `sum_j |term_j|`
/// (same prefactor), whose ratio to `|value|` bounds the cancellation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phi32Value {
    pub value: C64,
    pub abs_sum: f64,
}

/// `p_n(x; a, b | q) = a^{-n} (ab;q)_n 3phi2(q^{-n}, a z, a/z; ab, 0; q, q)`
/// with `x = (z + 1/z) / 2`.
///
/// The terms grow like `q^{-n^2/2}` while the sum stays moderate, so in
/// double precision this form is only accurate for small `n`; the recurrence
/// [`asc`] is the primary evaluator.
pub fn asc_3phi2(n: usize, z: C64, a: f64, b: f64, ctx: &QContext) -> Result<Phi32Value> {
    let (a, b) = if a == 0.0 { (b, a) } else { (a, b) };
    if a == 0.0 {
        return Err(Error::InvalidParameter(
            "the 3phi2 form needs a non-zero parameter".into(),
        ));
    }
    if z.norm() == 0.0 {
        return Err(Error::InvalidParameter("z must be non-zero".into()));
    }
    let q = ctx.q();
    let (az, a_z) = (a * z, a / z);
    let mut term = C64::new(1.0, 0.0);
    let mut sum = term;
    let mut abs_sum = 1.0;
    // on a mass point a/z or a z is q^{-k} and the series stops after k terms
    let stop = [az, a_z]
        .iter()
        .filter_map(|&p| terminating_index(p, q))
        .min()
        .map_or(n, |k| k.min(n));
    for j in 0..stop {
        let qj = q.powi(j as i32);
        let den = (1.0 - q * qj) * (1.0 - a * b * qj);
        term *= (1.0 - q.powi(j as i32 - n as i32)) * (1.0 - az * qj) * (1.0 - a_z * qj) * q / den;
        sum += term;
        abs_sum += term.norm();
    }
    let pre = qpoch_n(a * b, q, n) / a.powi(n as i32);
    if !(pre.is_finite() && sum.re.is_finite() && sum.im.is_finite()) {
        return Err(Error::Domain {
            what: "Al-Salam-Chihara 3phi2",
            detail: format!("non-finite value for n = {n}, a = {a}, b = {b}"),
        });
    }
    Ok(Phi32Value {
        value: sum * pre,
        abs_sum: abs_sum * pre.abs(),
    })
}

/// If `x = (e q^k + e^{-1} q^{-k}) / 2` with `|e q^k| > 1`, returns `k`.
pub(crate) fn mass_index(x: f64, e: f64, ctx: &QContext) -> Option<usize> {
    let q = ctx.q();
    let mut s = e;
    let mut k = 0;
    while s.abs() > 1.0 {
        let xk = 0.5 * (s + 1.0 / s);
        if (x - xk).abs() <= 1e-12 * xk.abs() {
            return Some(k);
        }
        s *= q;
        k += 1;
    }
    None
}

/// `P_k(a; b | q)`: the Poisson kernel at `t = q` on the diagonal at the mass
/// point `x_k = (a q^k + a^{-1} q^{-k}) / 2`,
/// `(ab q^k, bq/a; q)_inf / (ab, a^{-2} q^{1-2k}; q)_inf (q^{-k}, b q^{-k}/a, a^2 q^k; q)_k q^k`.
pub fn asc_mass_kernel(k: usize, a: f64, b: f64, ctx: &QContext) -> Result<f64> {
    let q = ctx.q();
    let qk = q.powi(k as i32);
    let num = qpoch_prod(&[a * b * qk, b * q / a], ctx, Order::Infinite)?;
    let den = qpoch_prod(&[a * b, q / (a * a * qk * qk)], ctx, Order::Infinite)?;
    let fin = qpoch_prod(&[1.0 / qk, b / (a * qk), a * a * qk], ctx, Order::Finite(k))?;
    let v = num / den * fin * qk;
    if !v.is_finite() {
        return Err(Error::Domain {
            what: "Al-Salam-Chihara mass kernel",
            detail: format!("singular at k = {k}, a = {a}, b = {b}"),
        });
    }
    Ok(v)
}

fn check_ab(a: f64, b: f64) -> Result<()> {
    if a * b < 1.0 {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "ab = {} must be below 1",
            a * b
        )))
    }
}

/// Poisson kernel `sum_n p_n(x) p_n(y) t^n / (q, ab; q)_n` in closed form.
///
/// Two regimes are supported: `|t| < 1` with `x, y` in `[-1, 1]`, through the
/// very-well-poised `8 W 7` representation, and `x = y` equal to a mass point
/// `x_k` of the parameter `e` with `|e| > 1` and `|t| < e^2 q^{2k}`, through
/// its terminating specialisation (at `t = q` the closed product
/// [`asc_mass_kernel`]).
pub fn asc_poisson(t: f64, x: f64, y: f64, a: f64, b: f64, ctx: &QContext) -> Result<f64> {
    check_ab(a, b)?;
    if t == 0.0 {
        return Ok(1.0);
    }
    let on_interval = (-1.0..=1.0).contains(&x) && (-1.0..=1.0).contains(&y);
    if on_interval {
        if t.abs() >= 1.0 {
            return Err(Error::Domain {
                what: "Al-Salam-Chihara Poisson kernel",
                detail: format!("|t| = {} is not below 1", t.abs()),
            });
        }
        if a == 0.0 || b == 0.0 {
            return poisson_by_series(t, x, y, a, b, ctx);
        }
        return poisson_interval(t, x, y, a, b, ctx);
    }
    if x == y {
        for (e, f) in [(a, b), (b, a)] {
            if let Some(k) = mass_index(x, e, ctx) {
                let radius = e * e * ctx.q().powi(2 * k as i32);
                if t.abs() >= radius {
                    return Err(Error::Domain {
                        what: "Al-Salam-Chihara Poisson kernel",
                        detail: format!("|t| = {} at mass point {k} needs |t| < {radius}", t.abs()),
                    });
                }
                return poisson_mass(t, k, e, f, ctx);
            }
        }
    }
    Err(Error::Domain {
        what: "Al-Salam-Chihara Poisson kernel",
        detail: format!("(x, y) = ({x}, {y}) is neither in [-1, 1]^2 nor a diagonal mass point"),
    })
}

fn poisson_interval(t: f64, x: f64, y: f64, a: f64, b: f64, ctx: &QContext) -> Result<f64> {
    let th = angle(x, "Al-Salam-Chihara Poisson kernel")?;
    let ps = angle(y, "Al-Salam-Chihara Poisson kernel")?;
    let num = circle_pair(a * t, th, ctx)? * circle_pair(b * t, ps, ctx)? * qpoch_inf(t, ctx)?;
    let den =
        circle_pair(t, th + ps, ctx)? * circle_pair(t, th - ps, ctx)? * qpoch_inf(a * b * t, ctx)?;
    let (et, ep) = (C64::from_polar(1.0, th), C64::from_polar(1.0, ps));
    let c = |v: f64| C64::new(v, 0.0);
    let w = w87(
        c(a * b * t / ctx.q()),
        c(t),
        b * et,
        b * et.conj(),
        a * ep,
        a * ep.conj(),
        ctx,
        c(t),
    )?;
    Ok(num / den * w.re)
}

fn poisson_mass(t: f64, k: usize, a: f64, b: f64, ctx: &QContext) -> Result<f64> {
    let q = ctx.q();
    if ((t - q) / q).abs() <= 1e-14 {
        return asc_mass_kernel(k, a, b, ctx);
    }
    let z = a * q.powi(k as i32);
    let num = qpoch_prod(
        &[a * t * z, a * t / z, b * t * z, b * t / z],
        ctx,
        Order::Infinite,
    )?;
    let den = qpoch_prod(
        &[t * z * z, t, t / (z * z), a * b * t],
        ctx,
        Order::Infinite,
    )?;
    let c = |v: f64| C64::new(v, 0.0);
    let w = w87(
        c(a * b * t / q),
        c(t),
        c(b * z),
        c(b / z),
        c(a * z),
        c(q.powi(-(k as i32))),
        ctx,
        c(t),
    )?;
    let v = num / den * w.re;
    if !v.is_finite() {
        return Err(Error::Domain {
            what: "Al-Salam-Chihara Poisson kernel",
            detail: format!("terminating form is singular at t = {t}"),
        });
    }
    Ok(v)
}

/// Consecutive negligible terms required before the fallback series stops.
const SERIES_QUIET_RUN: usize = 8;

fn poisson_by_series(t: f64, x: f64, y: f64, a: f64, b: f64, ctx: &QContext) -> Result<f64> {
    let q = ctx.q();
    let jac_x = asc_all(ctx.max_terms().min(4096), x, a, b, ctx);
    let jac_y = asc_all(jac_x.len() - 1, y, a, b, ctx);
    let (mut sum, mut scale, mut quiet) = (0.0, 1.0, 0);
    for n in 0..jac_x.len() {
        if n > 0 {
            scale *= t / ((1.0 - q.powi(n as i32)) * (1.0 - a * b * q.powi(n as i32 - 1)));
        }
        let term = jac_x[n] * jac_y[n] * scale;
        sum += term;
        quiet = if term.abs() <= ctx.tail_tol() * sum.abs().max(1.0) {
            quiet + 1
        } else {
            0
        };
        if quiet == SERIES_QUIET_RUN {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence {
        what: "Al-Salam-Chihara Poisson series",
        terms: jac_x.len(),
        tol: ctx.tail_tol(),
    })
}

/// Partial sum with `terms` terms of the defining series. On a mass point
/// the polynomials come from the `3 phi 2` form, which terminates there and
/// is stable, instead of the recurrence, which is not.
pub fn asc_poisson_series(
    t: f64,
    x: f64,
    y: f64,
    a: f64,
    b: f64,
    terms: usize,
    ctx: &QContext,
) -> Result<f64> {
    check_ab(a, b)?;
    if terms == 0 {
        return Ok(0.0);
    }
    let q = ctx.q();
    let values = |v: f64| -> Result<Vec<f64>> {
        for (e, f) in [(a, b), (b, a)] {
            if let Some(k) = mass_index(v, e, ctx) {
                let z = C64::new(e * q.powi(k as i32), 0.0);
                return (0..terms)
                    .map(|n| asc_3phi2(n, z, e, f, ctx).map(|p| p.value.re))
                    .collect();
            }
        }
        Ok(asc_all(terms - 1, v, a, b, ctx))
    };
    let (px, py) = (values(x)?, values(y)?);
    let (mut sum, mut scale) = (0.0, 1.0);
    for n in 0..terms {
        if n > 0 {
            scale *= t / ((1.0 - q.powi(n as i32)) * (1.0 - a * b * q.powi(n as i32 - 1)));
        }
        sum += px[n] * py[n] * scale;
    }
    Ok(sum)
}
