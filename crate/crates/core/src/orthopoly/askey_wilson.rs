use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qseries::{qpoch_inf, qpoch_n, qpoch_prod, Order, QContext};
use crate::quadrature::{gauss_legendre, Rule};
use crate::spectral::JacobiCoeffs;

use super::circle_pair;

/// Smallest Gauss-Legendre rule tried for the continuous part.
const MIN_NODES: usize = 32;
/// Largest rule before giving up.
const MAX_NODES: usize = 4096;
/// Successive continuous masses must agree to this before doubling stops.
const STABLE_TOL: f64 = 1e-10;
/// Allowed deviation of the total normalised mass from 1.
const TOTAL_MASS_TOL: f64 = 1e-9;

/// Real Askey-Wilson parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AWParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub ctx: QContext,
}

impl AWParams {
    /// Checks that every pairwise product is below 1 and `abcd` is not a
    /// power `q^{-m}`.
    pub fn new(a: f64, b: f64, c: f64, d: f64, ctx: QContext) -> Result<Self> {
        let p = [a, b, c, d];
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "Askey-Wilson parameters must be finite, got {p:?}"
            )));
        }
        for i in 0..4 {
            for j in i + 1..4 {
                if p[i] * p[j] >= 1.0 {
                    return Err(Error::InvalidParameter(format!(
                        "pairwise product {} * {} = {} is not below 1",
                        p[i],
                        p[j],
                        p[i] * p[j]
                    )));
                }
            }
        }
        let s = a * b * c * d;
        if s > 0.0 {
            let m = (-s.ln() / ctx.q().ln()).round();
            if m <= 0.0 && (s * ctx.q().powf(-m) - 1.0).abs() < 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "abcd = {s} is a power q^(-m)"
                )));
            }
        }
        Ok(Self { a, b, c, d, ctx })
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    /// `h_0 = (abcd;q)_inf / (q, ab, ac, ad, bc, bd, cd; q)_inf`.
    pub fn h0(&self) -> Result<f64> {
        let (a, b, c, d) = (self.a, self.b, self.c, self.d);
        let ctx = &self.ctx;
        let den = qpoch_prod(
            &[ctx.q(), a * b, a * c, a * d, b * c, b * d, c * d],
            ctx,
            Order::Infinite,
        )?;
        Ok(qpoch_inf(a * b * c * d, ctx)? / den)
    }
}

/// `w(cos theta; a, b, c, d | q)`.
pub fn aw_weight(theta: f64, p: &AWParams) -> Result<f64> {
    let mut den = 1.0;
    for e in p.as_array() {
        if e != 0.0 {
            den *= circle_pair(e, theta, &p.ctx)?;
        }
    }
    Ok(circle_pair(1.0, 2.0 * theta, &p.ctx)? / den)
}

/// Discrete mass of a normalised measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassPoint {
    pub x: f64,
    pub weight: f64,
    /// Index into `(a, b, c, d)` of the parameter producing the point.
    pub param: usize,
    pub k: usize,
}

/// The normalised Askey-Wilson measure: `w(cos theta) dtheta / (2 pi h_0)`
/// on `[-1, 1]` plus the discrete masses.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSpec {
    pub params: AWParams,
    pub h0: f64,
    pub masses: Vec<MassPoint>,
    /// Quadrature for the continuous part, nodes in `x`, normalised weights.
    pub rule: Rule,
}

impl MeasureSpec {
    /// Density with respect to `dx` on `(-1, 1)`.
    pub fn density(&self, x: f64) -> Result<f64> {
        if !(-1.0 < x && x < 1.0) {
            return Ok(0.0);
        }
        let w = aw_weight(x.acos(), &self.params)?;
        Ok(w / (2.0 * PI * self.h0 * (1.0 - x * x).sqrt()))
    }

    pub fn continuous_mass(&self) -> f64 {
        self.rule.weights.iter().sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.continuous_mass() + self.masses.iter().map(|m| m.weight).sum::<f64>()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.rule.integrate(&f) + self.masses.iter().map(|m| m.weight * f(m.x)).sum::<f64>()
    }

    /// Smallest interval containing the support.
    pub fn support_hull(&self) -> (f64, f64) {
        self.masses
            .iter()
            .fold((-1.0f64, 1.0f64), |(lo, hi), m| (lo.min(m.x), hi.max(m.x)))
    }
}

/// Unnormalised mass `w_k` at `x_k = (a q^k + a^{-1} q^{-k}) / 2` for the
/// parameter `a` with `|a q^k| > 1`, the others being `b, c, d`:
///
/// `(a^{-2};q)_inf / (q, ab, b/a, ac, c/a, ad, d/a; q)_inf
///  (1 - a^2 q^{2k}) / (1 - a^2) (a^2;q)_k / (q;q)_k (q/a)^k
///  prod_{e in b,c,d} prod_{i<k} (1 - a e q^i) / (e - a q^{i+1})`,
///
/// which is the usual `(ab, ac, ad; q)_k / (aq/b, aq/c, aq/d; q)_k (q/abcd)^k`
/// rearranged so that vanishing `b, c, d` are admissible.
pub fn aw_mass_weight(a: f64, others: [f64; 3], k: usize, ctx: &QContext) -> Result<f64> {
    let q = ctx.q();
    let mut den_params = vec![q];
    for e in others {
        den_params.push(a * e);
        den_params.push(e / a);
    }
    let lead = qpoch_inf(1.0 / (a * a), ctx)? / qpoch_prod(&den_params, ctx, Order::Infinite)?;
    let qk = q.powi(k as i32);
    let mut v = lead * (1.0 - a * a * qk * qk) / (1.0 - a * a) * qpoch_n(a * a, q, k)
        / qpoch_n(q, q, k)
        * (q / a).powi(k as i32);
    for e in others {
        let mut qi = 1.0;
        for _ in 0..k {
            v *= (1.0 - a * e * qi) / (e - a * qi * q);
            qi *= q;
        }
    }
    if !v.is_finite() {
        return Err(Error::Domain {
            what: "Askey-Wilson mass",
            detail: format!("mass {k} of parameter {a} is not finite"),
        });
    }
    Ok(v)
}

/// Builds the normalised measure, enumerating masses for every parameter
/// `e` with `|e| > 1` while `|e q^k| > 1`.
pub fn aw_measure(params: &AWParams) -> Result<MeasureSpec> {
    let ctx = &params.ctx;
    let q = ctx.q();
    let h0 = params.h0()?;
    if !(h0.is_finite() && h0 > 0.0) {
        return Err(Error::Domain {
            what: "Askey-Wilson measure",
            detail: format!("h0 = {h0} is not a positive number"),
        });
    }
    let p = params.as_array();
    let mut masses = Vec::new();
    for (i, &e) in p.iter().enumerate() {
        let others = [p[(i + 1) % 4], p[(i + 2) % 4], p[(i + 3) % 4]];
        let mut s = e;
        let mut k = 0;
        while s.abs() > 1.0 {
            let w = aw_mass_weight(e, others, k, ctx)? / h0;
            masses.push(MassPoint {
                x: 0.5 * (s + 1.0 / s),
                weight: w,
                param: i,
                k,
            });
            s *= q;
            k += 1;
        }
    }

    let build = |n: usize| -> Result<Rule> {
        let theta = gauss_legendre(n, 0.0, PI)?;
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for (&th, &wt) in theta.nodes.iter().zip(&theta.weights) {
            nodes.push(th.cos());
            weights.push(wt * aw_weight(th, params)? / (2.0 * PI * h0));
        }
        Ok(Rule { nodes, weights })
    };
    let mut n = MIN_NODES;
    let mut rule = build(n)?;
    loop {
        if n >= MAX_NODES {
            return Err(Error::NonConvergence {
                what: "Askey-Wilson continuous mass",
                terms: n,
                tol: STABLE_TOL,
            });
        }
        n *= 2;
        let next = build(n)?;
        let diff = (next.weights.iter().sum::<f64>() - rule.weights.iter().sum::<f64>()).abs();
        rule = next;
        if diff <= STABLE_TOL {
            break;
        }
    }
    let spec = MeasureSpec {
        params: *params,
        h0,
        masses,
        rule,
    };
    let total = spec.total_mass();
    if (total - 1.0).abs() > TOTAL_MASS_TOL {
        return Err(Error::NonConvergence {
            what: "Askey-Wilson total mass",
            terms: n,
            tol: TOTAL_MASS_TOL,
        });
    }
    Ok(spec)
}

/// Orthonormal recurrence coefficients of the Askey-Wilson polynomials in
/// `x`, with
///
/// `A_n = (1 - ab q^n)(1 - ac q^n)(1 - ad q^n)(1 - abcd q^{n-1})
///        / (a (1 - abcd q^{2n-1})(1 - abcd q^{2n}))`,
/// `C_n = a (1 - q^n)(1 - bc q^{n-1})(1 - bd q^{n-1})(1 - cd q^{n-1})
///        / ((1 - abcd q^{2n-2})(1 - abcd q^{2n-1}))`,
///
/// `a_n = sqrt(A_{n-1} C_n) / 2` and `b_n = (a + 1/a - A_n - C_n) / 2`; the
/// largest parameter in modulus plays the role of `a`.
pub fn aw_jacobi(params: &AWParams) -> JacobiCoeffs {
    let q = params.ctx.q();
    let mut p = params.as_array();
    let lead = (0..4)
        .max_by(|&i, &j| p[i].abs().total_cmp(&p[j].abs()))
        .unwrap_or(0);
    p.swap(0, lead);
    let [a, b, c, d] = p;
    if a == 0.0 {
        return JacobiCoeffs::new(move |n| 0.5 * (1.0 - q.powi(n as i32)).sqrt(), |_| 0.0);
    }
    let s = a * b * c * d;
    let big_a = move |n: usize| {
        let qn = q.powi(n as i32);
        let tail = if n == 0 {
            1.0 / (1.0 - s)
        } else {
            (1.0 - s * qn / q) / ((1.0 - s * qn * qn / q) * (1.0 - s * qn * qn))
        };
        (1.0 - a * b * qn) * (1.0 - a * c * qn) * (1.0 - a * d * qn) / a * tail
    };
    let big_c = move |n: usize| {
        if n == 0 {
            return 0.0;
        }
        let qn = q.powi(n as i32);
        let qm = qn / q;
        a * (1.0 - qn) * (1.0 - b * c * qm) * (1.0 - b * d * qm) * (1.0 - c * d * qm)
            / ((1.0 - s * qm * qm) * (1.0 - s * qn * qm))
    };
    JacobiCoeffs::new(
        move |n| 0.5 * (big_a(n - 1) * big_c(n)).sqrt(),
        move |n| 0.5 * (a + 1.0 / a - big_a(n) - big_c(n)),
    )
}
