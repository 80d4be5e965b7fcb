//! Basic hypergeometric machinery: q-shifted factorials, `r phi s` series,
//! the very-well-poised `8 W 7` series and Jackson q-integrals.
//!
//! Every routine is parametrised by a [`QContext`], which fixes the base
//! `0 < q < 1` together with the truncation policy used for infinite sums and
//! products.
//!
//! Truncation bounds:
//!
//! * `(a;q)_inf` stops at the first `m` with `|a q^m| < tail_tol (1 - q)`. The
//!   discarded factor `prod_{i>=m} (1 - a q^i)` then satisfies
//!   `|log prod| <= x / ((1 - q)(1 - x))` with `x = |a q^m|`, so the relative
//!   error of the returned product is at most `tail_tol (1 + O(tail_tol))`.
//! * Non-terminating series stop once the geometric tail estimate
//!   `|t_{k+1}| / (1 - r_k)`, with `r_k = |t_{k+1} / t_k| < 1`, drops below
//!   `tail_tol * max(1, |partial sum|)`.
//! * q-integrals stop once `|b| q^{k+1} max(|f(b q^k)|, |f(0)|)`, an estimate
//!   of the remaining Jackson sum for `f` continuous at the origin, drops below
//!   `tail_tol`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Relative tolerance used to recognise an exact `q^{-n}` parameter.
pub const TERMINATING_RTOL: f64 = 1e-12;

/// The base `q` together with the truncation policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QContext {
    q: f64,
    tail_tol: f64,
    max_terms: usize,
}

impl QContext {
    pub const DEFAULT_TAIL_TOL: f64 = 1e-16;
    pub const DEFAULT_MAX_TERMS: usize = 100_000;

    pub fn new(q: f64) -> Result<Self> {
        Self::with_policy(q, Self::DEFAULT_TAIL_TOL, Self::DEFAULT_MAX_TERMS)
    }

    pub fn with_policy(q: f64, tail_tol: f64, max_terms: usize) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "q must lie in (0, 1), got {q}"
            )));
        }
        if !(tail_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tail_tol must be positive, got {tail_tol}"
            )));
        }
        if max_terms == 0 {
            return Err(Error::InvalidParameter(
                "max_terms must be at least 1".into(),
            ));
        }
        Ok(Self {
            q,
            tail_tol,
            max_terms,
        })
    }

    #[inline]
    pub fn q(&self) -> f64 {
        self.q
    }

    #[inline]
    pub fn tail_tol(&self) -> f64 {
        self.tail_tol
    }

    #[inline]
    pub fn max_terms(&self) -> usize {
        self.max_terms
    }

    /// Same policy, base `q^2`.
    pub fn squared(&self) -> Self {
        Self {
            q: self.q * self.q,
            ..*self
        }
    }

    /// `q^x` for real `x`.
    #[inline]
    pub fn pow(&self, x: f64) -> f64 {
        self.q.powf(x)
    }
}

/// Length of a q-shifted factorial: finite `k` or `k = inf`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Finite(usize),
    Infinite,
}

/// `(a;q)_n` for real `a`; total.
pub fn qpoch_n(a: f64, q: f64, n: usize) -> f64 {
    let mut acc = 1.0;
    let mut aq = a;
    for _ in 0..n {
        acc *= 1.0 - aq;
        aq *= q;
    }
    acc
}

/// `(a;q)_inf` for real `a`.
pub fn qpoch_inf(a: f64, ctx: &QContext) -> Result<f64> {
    qpoch(C64::new(a, 0.0), ctx, Order::Infinite).map(|z| z.re)
}

/// `(a_1, ..., a_r; q)_k` for real parameters.
pub fn qpoch_prod(params: &[f64], ctx: &QContext, order: Order) -> Result<f64> {
    let mut acc = 1.0;
    for &a in params {
        acc *= match order {
            Order::Finite(n) => qpoch_n(a, ctx.q, n),
            Order::Infinite => qpoch_inf(a, ctx)?,
        };
    }
    Ok(acc)
}

/// `(a;q)_k = prod_{i<k} (1 - a q^i)`, including `k = inf`.
pub fn qpoch(a: C64, ctx: &QContext, order: Order) -> Result<C64> {
    let q = ctx.q;
    match order {
        Order::Finite(n) => {
            let mut acc = C64::new(1.0, 0.0);
            let mut aq = a;
            for _ in 0..n {
                acc *= 1.0 - aq;
                aq *= q;
            }
            Ok(acc)
        }
        Order::Infinite => {
            let cutoff = ctx.tail_tol * (1.0 - q);
            let mut acc = C64::new(1.0, 0.0);
            let mut aq = a;
            for _ in 0..ctx.max_terms {
                if aq.norm() < cutoff {
                    return Ok(acc);
                }
                acc *= 1.0 - aq;
                aq *= q;
            }
            if aq.norm() < cutoff {
                return Ok(acc);
            }
            Err(Error::NonConvergence {
                what: "infinite q-shifted factorial",
                terms: ctx.max_terms,
                tol: ctx.tail_tol,
            })
        }
    }
}

/// If `a = q^{-n}` (relative tolerance [`TERMINATING_RTOL`]), returns `n`.
pub fn terminating_index(a: C64, q: f64) -> Option<usize> {
    let mag = a.norm();
    if mag < 1.0 - TERMINATING_RTOL || a.im.abs() > TERMINATING_RTOL * mag || a.re <= 0.0 {
        return None;
    }
    let n = (-(a.re.ln()) / q.ln()).round();
    if n < 0.0 {
        return None;
    }
    let target = q.powf(-n);
    if (a.re - target).abs() <= TERMINATING_RTOL * target {
        Some(n as usize)
    } else {
        None
    }
}

/// Parameters of `r phi s (a_1..a_r; b_1..b_s; q, z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSpec {
    pub upper: Vec<C64>,
    pub lower: Vec<C64>,
    pub z: C64,
    pub base: QContext,
}

impl SeriesSpec {
    pub fn new(upper: Vec<C64>, lower: Vec<C64>, z: C64, base: QContext) -> Self {
        Self {
            upper,
            lower,
            z,
            base,
        }
    }

    /// Convenience constructor for real parameters and argument.
    pub fn real(upper: &[f64], lower: &[f64], z: f64, base: QContext) -> Self {
        let c = |v: &[f64]| v.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::new(c(upper), c(lower), C64::new(z, 0.0), base)
    }

    /// Number of terms if some upper parameter is `q^{-n}`: `n + 1`.
    pub fn terminating_len(&self) -> Option<usize> {
        self.upper
            .iter()
            .filter_map(|&a| terminating_index(a, self.base.q))
            .min()
            .map(|n| n + 1)
    }

    fn check_lower(&self, len: Option<usize>) -> Result<()> {
        for &b in &self.lower {
            if let Some(m) = terminating_index(b, self.base.q) {
                // (q^{-m};q)_k vanishes from k = m + 1 on.
                let used = len.map_or(usize::MAX, |l| l - 1);
                if used > m {
                    return Err(Error::InvalidParameter(format!(
                        "lower parameter {b} equals q^-{m}; the series is undefined"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Sums `sum_k w(k) t_k` with `t_0 = 1` and `t_{k+1} = t_k * ratio(k)`.
fn sum_by_ratio(
    ratio: impl Fn(usize) -> C64,
    weight: impl Fn(usize) -> C64,
    terminating_len: Option<usize>,
    ctx: &QContext,
    what: &'static str,
) -> Result<C64> {
    let mut term = C64::new(1.0, 0.0);
    let mut sum = weight(0);
    if let Some(len) = terminating_len {
        for k in 0..len.saturating_sub(1) {
            term *= ratio(k);
            sum += weight(k + 1) * term;
        }
        return Ok(sum);
    }
    let mut cur_mag = sum.norm();
    for k in 0..ctx.max_terms {
        term *= ratio(k);
        let next = weight(k + 1) * term;
        let next_mag = next.norm();
        sum += next;
        if term.norm() == 0.0 {
            return Ok(sum);
        }
        let r = if cur_mag > 0.0 {
            next_mag / cur_mag
        } else {
            f64::INFINITY
        };
        let scale = ctx.tail_tol * sum.norm().max(1.0);
        if r < 1.0 && next_mag <= scale && next_mag * r / (1.0 - r) <= scale {
            return Ok(sum);
        }
        if !sum.is_finite() {
            break;
        }
        cur_mag = next_mag;
    }
    Err(Error::NonConvergence {
        what,
        terms: ctx.max_terms,
        tol: ctx.tail_tol,
    })
}

/// `r phi s` in the normalisation with the factor `((-1)^k q^{k(k-1)/2})^{s+1-r}`.
pub fn phi_rs(spec: &SeriesSpec) -> Result<C64> {
    let len = spec.terminating_len();
    spec.check_lower(len)?;
    let q = spec.base.q;
    let excess = spec.lower.len() as i32 + 1 - spec.upper.len() as i32;
    let ratio = |k: usize| {
        let qk = q.powi(k as i32);
        let mut num = spec.z;
        for &a in &spec.upper {
            num *= 1.0 - a * qk;
        }
        let mut den = C64::new(1.0 - qk * q, 0.0);
        for &b in &spec.lower {
            den *= 1.0 - b * qk;
        }
        let extra = if excess == 0 { 1.0 } else { (-qk).powi(excess) };
        num / den * extra
    };
    let one = |_| C64::new(1.0, 0.0);
    sum_by_ratio(ratio, one, len, &spec.base, "basic hypergeometric series")
}

/// Very-well-poised `8 W 7 (a; b, c, d, e, f; q, z)`.
///
/// The pair `(q sqrt a, -q sqrt a; q)_k / (sqrt a, -sqrt a; q)_k` is evaluated
/// in its reduced form `(1 - a q^{2k}) / (1 - a)`; this agrees with the
/// expanded series under any branch of the square root and stays finite when
/// `sqrt a` is itself a power `q^{-m}`.
pub fn w87(a: C64, b: C64, c: C64, d: C64, e: C64, f: C64, ctx: &QContext, z: C64) -> Result<C64> {
    let q = ctx.q;
    let rest = [b, c, d, e, f];
    if rest.iter().any(|p| p.norm() == 0.0) {
        return Err(Error::InvalidParameter(
            "8W7 parameters b..f must be non-zero".into(),
        ));
    }
    let len = std::iter::once(a)
        .chain(rest)
        .filter_map(|p| terminating_index(p, q))
        .min()
        .map(|n| n + 1);
    let lower: Vec<C64> = rest.iter().map(|&p| q * a / p).collect();
    SeriesSpec::new(vec![], lower.clone(), z, *ctx).check_lower(len)?;
    if (1.0 - a).norm() == 0.0 {
        return Err(Error::InvalidParameter(
            "8W7 with a = 1 is undefined".into(),
        ));
    }
    let vwp = |k: usize| (1.0 - a * q.powi(2 * k as i32)) / (1.0 - a);
    let ratio = |k: usize| {
        let qk = q.powi(k as i32);
        let mut num = z * (1.0 - a * qk);
        for &p in &rest {
            num *= 1.0 - p * qk;
        }
        let mut den = C64::new(1.0 - qk * q, 0.0);
        for &l in &lower {
            den *= 1.0 - l * qk;
        }
        num / den
    };
    sum_by_ratio(ratio, vwp, len, ctx, "very-well-poised 8phi7 series")
}

/// Jackson integral `int_a^b f(x) d_q x`.
pub fn q_integral(f: impl Fn(f64) -> f64, a: f64, b: f64, ctx: &QContext) -> Result<f64> {
    let f0 = f(0.0);
    let upper = q_integral_from_zero(&f, f0, b, ctx)?;
    let lower = q_integral_from_zero(&f, f0, a, ctx)?;
    Ok(upper - lower)
}

fn q_integral_from_zero(f: &impl Fn(f64) -> f64, f0: f64, b: f64, ctx: &QContext) -> Result<f64> {
    if b == 0.0 {
        return Ok(0.0);
    }
    let q = ctx.q;
    let mut sum = 0.0;
    let mut qk = 1.0;
    for _ in 0..ctx.max_terms {
        let fk = f(b * qk);
        sum += fk * qk;
        let tail = b.abs() * qk * q * fk.abs().max(f0.abs());
        if tail <= ctx.tail_tol {
            return Ok((1.0 - q) * b * sum);
        }
        qk *= q;
    }
    Err(Error::NonConvergence {
        what: "q-integral",
        terms: ctx.max_terms,
        tol: ctx.tail_tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn ctx(q: f64) -> QContext {
        QContext::new(q).unwrap()
    }

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn context_rejects_bad_input() {
        assert!(QContext::new(0.0).is_err());
        assert!(QContext::new(1.0).is_err());
        assert!(QContext::with_policy(0.5, 0.0, 10).is_err());
        assert!(QContext::with_policy(0.5, 1e-12, 0).is_err());
    }

    #[test]
    fn qpoch_examples() {
        let ctx = ctx(0.5);
        let v = qpoch(c(0.5), &ctx, Order::Finite(2)).unwrap();
        assert_eq!(v.re, 0.375);
        assert_eq!(
            qpoch(C64::new(3.7, -1.0), &ctx, Order::Finite(0)).unwrap(),
            c(1.0)
        );
        assert_eq!(qpoch(c(0.0), &ctx, Order::Infinite).unwrap(), c(1.0));
    }

    #[test]
    fn qpoch_infinite_matches_long_product() {
        let ctx = ctx(0.7);
        let brute = qpoch_n(0.3, 0.7, 400);
        assert_relative_eq!(qpoch_inf(0.3, &ctx).unwrap(), brute, max_relative = 1e-15);
        // Euler: (q;q)_inf for q = 1/2.
        assert_relative_eq!(
            qpoch_inf(0.5, &self::ctx(0.5)).unwrap(),
            0.288_788_095_086_602_4,
            max_relative = 1e-15
        );
    }

    #[test]
    fn qpoch_infinite_cap() {
        let tight = QContext::with_policy(0.99, 1e-16, 10).unwrap();
        assert!(matches!(
            qpoch(c(0.5), &tight, Order::Infinite),
            Err(Error::NonConvergence { .. })
        ));
    }

    #[test]
    fn terminating_detection() {
        let q: f64 = 0.5;
        assert_eq!(terminating_index(c(q.powi(-3)), q), Some(3));
        assert_eq!(terminating_index(c(1.0), q), Some(0));
        assert_eq!(terminating_index(c(q.powi(-3) * (1.0 + 1e-9)), q), None);
        assert_eq!(terminating_index(c(-8.0), q), None);
        assert_eq!(terminating_index(c(0.25), q), None);
    }

    #[test]
    fn q_binomial_terminating() {
        let ctx = ctx(0.5);
        let (n, x) = (3, 0.7);
        let q: f64 = 0.5;
        let spec = SeriesSpec::real(&[q.powi(-n)], &[], q.powi(n) * x, ctx);
        assert_eq!(spec.terminating_len(), Some(4));
        let v = phi_rs(&spec).unwrap();
        assert_relative_eq!(v.re, qpoch_n(x, q, n as usize), max_relative = 1e-14);
    }

    #[test]
    fn zero_phi_zero_is_infinite_product() {
        let ctx = ctx(0.25);
        let v = phi_rs(&SeriesSpec::real(&[], &[], 0.3, ctx)).unwrap();
        assert_relative_eq!(v.re, qpoch_inf(0.3, &ctx).unwrap(), max_relative = 1e-14);
    }

    #[test]
    fn z_zero_gives_one() {
        let ctx = ctx(0.5);
        let spec = SeriesSpec::real(&[0.2, 0.4], &[0.7], 0.0, ctx);
        assert_eq!(phi_rs(&spec).unwrap(), c(1.0));
        let one = c(1.0);
        let w = w87(
            c(0.1),
            c(0.2),
            c(0.3),
            c(0.4),
            c(0.5),
            c(0.6),
            &ctx,
            C64::new(0.0, 0.0),
        );
        assert_eq!(w.unwrap(), one);
    }

    #[test]
    fn lower_parameter_pole_rejected() {
        let q: f64 = 0.5;
        let spec = SeriesSpec::real(&[0.3], &[q.powi(-2)], 0.1, ctx(q));
        assert!(matches!(phi_rs(&spec), Err(Error::InvalidParameter(_))));
        // Harmless when the series stops before the vanishing factor.
        let spec = SeriesSpec::real(&[q.powi(-1)], &[q.powi(-2)], 0.1, ctx(q));
        assert!(phi_rs(&spec).is_ok());
    }

    #[test]
    fn non_convergence_reported() {
        let small = QContext::with_policy(0.5, 1e-16, 5).unwrap();
        let spec = SeriesSpec::real(&[0.3, 0.2], &[0.1], 0.9, small);
        assert!(matches!(phi_rs(&spec), Err(Error::NonConvergence { .. })));
    }

    #[test]
    fn w87_matches_expanded_series() {
        let ctx = ctx(0.5);
        let a = C64::new(0.3, 0.1);
        let (b, cc, d, e, f) = (c(0.2), c(-0.4), C64::new(0.1, 0.3), c(0.5), c(0.25));
        let z = C64::new(0.4, -0.2);
        let sa = a.sqrt();
        let q = 0.5;
        let upper = vec![a, q * sa, -q * sa, b, cc, d, e, f];
        let lower = vec![
            sa,
            -sa,
            q * a / b,
            q * a / cc,
            q * a / d,
            q * a / e,
            q * a / f,
        ];
        let expanded = phi_rs(&SeriesSpec::new(upper, lower, z, ctx)).unwrap();
        let reduced = w87(a, b, cc, d, e, f, &ctx, z).unwrap();
        assert!((expanded - reduced).norm() <= 1e-14 * expanded.norm());
    }

    #[test]
    fn q_integral_examples() {
        let ctx = ctx(0.5);
        assert_relative_eq!(
            q_integral(|_| 1.0, 0.0, 1.0, &ctx).unwrap(),
            1.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            q_integral(|x| x, 0.0, 1.0, &ctx).unwrap(),
            2.0 / 3.0,
            max_relative = 1e-15
        );

        let q: f64 = 0.5;
        let tau = 0.4;
        let base = ctx.squared();
        let top = q.powf(2.0 * tau);
        let v = q_integral(|x| x, -1.0, top, &base).unwrap();
        // Direct summation of both geometric sums.
        let mut direct = 0.0;
        for k in 0..200 {
            let qk = (q * q).powi(k);
            direct += (1.0 - q * q) * (top * top - 1.0) * qk * qk;
        }
        assert!((v - direct).abs() < 1e-14);
        assert_relative_eq!(
            v,
            (q.powf(4.0 * tau) - 1.0) / (1.0 + q * q),
            max_relative = 1e-14
        );
    }

    #[test]
    fn q_integral_tail_is_independent_of_terminating_policy() {
        let q: f64 = 0.5;
        let loose = QContext::with_policy(q, 1e-6, 1000).unwrap();
        let tight = ctx(q);
        let spec = |c| SeriesSpec::real(&[q.powi(-5), 0.3], &[0.6], 0.7, c);
        assert_eq!(phi_rs(&spec(loose)).unwrap(), phi_rs(&spec(tight)).unwrap());
    }

    proptest! {
        #[test]
        fn qpoch_step_recurrence(a in -3.0f64..3.0, q in 0.05f64..0.95, k in 0usize..50) {
            let ctx = QContext::new(q).unwrap();
            let lhs = qpoch(c(a), &ctx, Order::Finite(k + 1)).unwrap();
            let aq = (0..k).fold(a, |acc, _| acc * q);
            let rhs = qpoch(c(a), &ctx, Order::Finite(k)).unwrap() * (1.0 - aq);
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn q_binomial_identity(
            n in 0i32..=20,
            x in -2.0f64..2.0,
            qi in 0usize..3,
        ) {
            let q = [0.3, 0.5, 0.8][qi];
            let ctx = QContext::new(q).unwrap();
            let spec = SeriesSpec::real(&[q.powi(-n)], &[], q.powi(n) * x, ctx);
            let lhs = phi_rs(&spec).unwrap().re;
            let rhs = qpoch_n(x, q, n as usize);
            // Relative to max(1, |rhs|): (x;q)_n has zeros at x = q^{-j} inside the range.
            prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1.0));
        }

        #[test]
        fn q_integral_of_polynomials(
            coeffs in proptest::collection::vec(-2.0f64..2.0, 1..=11),
            b in -2.0f64..2.0,
            q in 0.1f64..0.9,
        ) {
            let ctx = QContext::new(q).unwrap();
            let p = |x: f64| coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c);
            let got = q_integral(p, 0.0, b, &ctx).unwrap();
            let want: f64 = coeffs
                .iter()
                .enumerate()
                .map(|(m, &c)| c * b.powi(m as i32 + 1) * (1.0 - q) / (1.0 - q.powi(m as i32 + 1)))
                .sum();
            let scale: f64 = coeffs
                .iter()
                .enumerate()
                .map(|(m, &c)| (c * b.powi(m as i32 + 1)).abs())
                .sum::<f64>()
                .max(1e-300);
            prop_assert!((got - want).abs() <= 1e-12 * scale);
        }
    }
}
