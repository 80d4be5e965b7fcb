use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qseries::{qpoch_inf, qpoch_n, QContext, C64};

/// Relative gap between the truncated and the closed-form squared norm above
/// which an eigenvector is considered cut off.
const NORM_TRUNCATION_TOL: f64 = 1e-10;

/// Eigenvalue label of `pi_phi(rho_{tau,inf})`: `Neg(k)` is `-q^{2k}`,
/// `Pos(k)` is `q^{2 tau + 2k}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EigenLabel {
    Neg(usize),
    Pos(usize),
}

impl EigenLabel {
    pub fn lambda(&self, tau: f64, ctx: &QContext) -> f64 {
        match *self {
            EigenLabel::Neg(k) => -ctx.pow(2.0 * k as f64),
            EigenLabel::Pos(k) => ctx.pow(2.0 * tau + 2.0 * k as f64),
        }
    }

    /// The label of `lambda` at parameter `tau`, if it is an eigenvalue.
    pub fn from_lambda(lambda: f64, tau: f64, ctx: &QContext) -> Option<Self> {
        let lq = ctx.q().ln();
        let snap = |x: f64| {
            let k = x.round();
            ((x - k).abs() < 1e-9 && k >= 0.0).then_some(k as usize)
        };
        if lambda < 0.0 {
            snap((-lambda).ln() / (2.0 * lq)).map(EigenLabel::Neg)
        } else if lambda > 0.0 {
            snap(lambda.ln() / (2.0 * lq) - tau).map(EigenLabel::Pos)
        } else {
            None
        }
    }

    pub fn k(&self) -> usize {
        match *self {
            EigenLabel::Neg(k) | EigenLabel::Pos(k) => k,
        }
    }
}

/// `ln (q^{2a}; q^2)_j` for `a >= 1`, all factors positive.
fn ln_qpoch_pos(start: usize, j: usize, lq2: f64) -> f64 {
    (0..j)
        .map(|i| (-((lq2 * (start + i) as f64).exp())).ln_1p())
        .sum()
}

/// `p_0(lambda), ..., p_{n_max}(lambda)` for the eigenvalue `label`.
///
/// Each label is summed in the representation that terminates after
/// `min(n, k)` terms: the first one for `q^{2 tau + 2k}`, the second one for
/// `-q^{2k}`. With `Q = q^2` and `u = -tau` resp. `u = tau`, the `j`-th term
/// of `p_n` is
///
/// `(-1)^j q^{n u + n(n-1)/2 + 2j^2 - 2nj - 2uj} (Q^{n-j+1};Q)_j (Q^{k-j+1};Q)_j / ((Q;Q)_j sqrt((Q;Q)_n))`
///
/// times `(-1)^n` for `-q^{2k}`; exponents are accumulated in log space.
pub fn eigen_coeffs(label: EigenLabel, tau: f64, n_max: usize, ctx: &QContext) -> Vec<f64> {
    let lq = ctx.q().ln();
    let lq2 = 2.0 * lq;
    let (u, k, alternating) = match label {
        EigenLabel::Pos(k) => (-tau, k, false),
        EigenLabel::Neg(k) => (tau, k, true),
    };
    (0..=n_max)
        .map(|n| {
            let nf = n as f64;
            let base = (nf * u + 0.5 * nf * (nf - 1.0)) * lq - 0.5 * ln_qpoch_pos(1, n, lq2);
            let mut sum = 0.0;
            for j in 0..=n.min(k) {
                let jf = j as f64;
                let e = (2.0 * jf * jf - 2.0 * nf * jf - 2.0 * u * jf) * lq
                    + ln_qpoch_pos(n - j + 1, j, lq2)
                    + ln_qpoch_pos(k - j + 1, j, lq2)
                    - ln_qpoch_pos(1, j, lq2);
                let t = (base + e).exp();
                sum += if j % 2 == 0 { t } else { -t };
            }
            if alternating && n % 2 == 1 {
                -sum
            } else {
                sum
            }
        })
        .collect()
}

/// Value of one `2 phi 1` representation of `p_n(lambda)` with the sum of
/// the term moduli (same prefactor).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormValue {
    pub value: f64,
    pub abs_sum: f64,
}

/// `p_n(lambda)` by direct summation of representation `form` (1 or 2):
///
/// 1. `q^{-n tau} q^{n(n-1)/2} / sqrt((q^2;q^2)_n) 2phi1(q^{-2n}, q^{2 tau}/lambda; 0; q^2, -q^2 lambda)`
/// 2. `(-1)^n q^{n tau} q^{n(n-1)/2} / sqrt((q^2;q^2)_n) 2phi1(q^{-2n}, -1/lambda; 0; q^2, q^{2-2 tau} lambda)`
pub fn eigen_coeffs_by_form(
    form: u8,
    lambda: f64,
    tau: f64,
    n: usize,
    ctx: &QContext,
) -> Result<FormValue> {
    let q = ctx.q();
    let q2 = q * q;
    let (b, z, pre) = match form {
        1 => (
            q.powf(2.0 * tau) / lambda,
            -q2 * lambda,
            q.powf(-(n as f64) * tau),
        ),
        2 => (
            -1.0 / lambda,
            q.powf(2.0 - 2.0 * tau) * lambda,
            if n % 2 == 0 { 1.0 } else { -1.0 } * q.powf(n as f64 * tau),
        ),
        _ => {
            return Err(Error::InvalidParameter(format!(
                "form must be 1 or 2, got {form}"
            )));
        }
    };
    let pre = pre * q.powf(0.5 * (n * n.saturating_sub(1)) as f64) / qpoch_n(q2, q2, n).sqrt();
    let (mut term, mut sum, mut abs_sum) = (1.0, 1.0, 1.0);
    for j in 0..n {
        let q2j = q2.powi(j as i32);
        term *= (1.0 - q2.powi(j as i32 - n as i32)) * (1.0 - b * q2j) * z / (1.0 - q2 * q2j);
        sum += term;
        abs_sum += term.abs();
    }
    Ok(FormValue {
        value: pre * sum,
        abs_sum: pre.abs() * abs_sum,
    })
}

/// Closed-form `<v_lambda, v_lambda>`:
/// `q^{-2k} (q^2, -q^{2-2 tau}; q^2)_k (-q^{2 tau}; q^2)_inf` for `-q^{2k}`,
/// `q^{-2k} (q^2, -q^{2+2 tau}; q^2)_k (-q^{-2 tau}; q^2)_inf` for `q^{2 tau + 2k}`.
pub fn eigen_norm_sq(label: EigenLabel, tau: f64, ctx: &QContext) -> Result<f64> {
    let c2 = ctx.squared();
    let q2 = c2.q();
    let (mid, tail) = match label {
        EigenLabel::Neg(_) => (2.0 - 2.0 * tau, 2.0 * tau),
        EigenLabel::Pos(_) => (2.0 + 2.0 * tau, -2.0 * tau),
    };
    let k = label.k();
    Ok(q2.powi(-(k as i32))
        * qpoch_n(q2, q2, k)
        * qpoch_n(-ctx.pow(mid), q2, k)
        * qpoch_inf(-ctx.pow(tail), &c2)?)
}

/// `v_lambda = sum_n i^n e^{i n phi} p_n(lambda) e_n`, truncated at `N`.
pub fn eigenvector(label: EigenLabel, tau: f64, phi: f64, n: usize, ctx: &QContext) -> Vec<C64> {
    eigen_coeffs(label, tau, n, ctx)
        .into_iter()
        .enumerate()
        .map(|(m, p)| C64::new(0.0, 1.0).powi(m as i32) * C64::from_polar(p, m as f64 * phi))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenBasisEntry {
    pub label: EigenLabel,
    pub lambda: f64,
    pub vector: Vec<C64>,
    pub norm_sq: f64,
}

/// Eigenvectors for `-q^{2k}` and `q^{2 tau + 2k}`, `k <= k_max`, truncated at
/// `N`. Fails if a vector has visible weight beyond `e_N`.
pub fn eigen_basis(
    tau: f64,
    phi: f64,
    k_max: usize,
    n: usize,
    ctx: &QContext,
) -> Result<Vec<EigenBasisEntry>> {
    let mut out = Vec::with_capacity(2 * (k_max + 1));
    for k in 0..=k_max {
        for label in [EigenLabel::Neg(k), EigenLabel::Pos(k)] {
            let vector = eigenvector(label, tau, phi, n, ctx);
            let norm_sq = eigen_norm_sq(label, tau, ctx)?;
            let partial: f64 = vector.iter().map(|v| v.norm_sqr()).sum();
            if (partial - norm_sq).abs() > NORM_TRUNCATION_TOL * norm_sq {
                return Err(Error::NonConvergence {
                    what: "eigenvector truncation",
                    terms: n + 1,
                    tol: NORM_TRUNCATION_TOL,
                });
            }
            out.push(EigenBasisEntry {
                label,
                lambda: label.lambda(tau, ctx),
                vector,
                norm_sq,
            });
        }
    }
    Ok(out)
}

/// Which pair of eigenvalue families a matrix coefficient of `D` couples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DCase {
    /// `<D v_{-q^{2k}}, v_{-q^{2l}}>`.
    NegNeg,
    /// `<D v_{q^{2 tau+2k}}, v_{q^{2 tau+2l}}>`.
    PosPos,
    /// `<D v_{-q^{2k}}, v_{q^{2 tau+2l}}>`.
    NegPos,
}

/// Closed-form matrix coefficients of `D` in the eigenbasis; the diagonal
/// cases are symmetric, so `k < l` is answered by swapping.
pub fn d_coeff(tau: f64, case: DCase, k: usize, l: usize, ctx: &QContext) -> Result<f64> {
    let c2 = ctx.squared();
    let q2 = c2.q();
    let f = |e: f64, m: usize| qpoch_n(-ctx.pow(e), q2, m);
    Ok(match case {
        DCase::NegNeg => {
            let (k, l) = (k.max(l), k.min(l));
            qpoch_inf(-ctx.pow(2.0 * tau + 2.0), &c2)? * qpoch_n(q2, q2, k) * f(2.0 - 2.0 * tau, l)
        }
        DCase::PosPos => {
            let (k, l) = (k.max(l), k.min(l));
            qpoch_inf(-ctx.pow(2.0 - 2.0 * tau), &c2)? * qpoch_n(q2, q2, k) * f(2.0 + 2.0 * tau, l)
        }
        DCase::NegPos => qpoch_inf(q2, &c2)? * f(2.0 - 2.0 * tau, k) * f(2.0 + 2.0 * tau, l),
    })
}
