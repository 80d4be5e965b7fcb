//! Acceptance suite: one PASS/FAIL line per criterion.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qhaar::haarverify::{
    bailey_check, mass_identity_check, observation_measure, poisson_pole_value, rel_err,
    rho_inf_extremes, thm4_measure, thm6_measure_spec, verify, Theorem, VerifyConfig,
};
use qhaar::orthopoly::{
    asc_jacobi, asc_poisson, asc_poisson_series, aw_jacobi, aw_measure, charlier_norm, cqh,
    cqh_poisson, cqh_poisson_series, cqh_weight, q_charlier, AWParams,
};
use qhaar::qseries::{qpoch_inf, qpoch_n};
use qhaar::qsu2rep::{
    build_rep, eigen_basis, element, haar_trace, trace_at_phi, verify_structure, Element,
};
use qhaar::quadrature::gauss_legendre;
use qhaar::spectral::JacobiCoeffs;
use qhaar::{Poly, QContext};

type Check = Result<(bool, String), qhaar::Error>;

fn ctx(q: f64) -> QContext {
    QContext::new(q).unwrap()
}

/// `|trace - measure| <= 1e-7 (1 + |measure|)` for the semicircle.
fn criterion_1() -> Check {
    let mut worst = 0.0f64;
    for q in [0.3, 0.5, 0.8] {
        let cfg = VerifyConfig::monomials(ctx(q), 0.0, 0.0, 80, 6)?;
        let r = verify(Theorem::Cocentral, &cfg)?;
        for row in &r.rows {
            worst = worst.max(row.abs_err / (1.0 + row.measure_side.abs()));
        }
    }
    let x2 = (thm4_measure(&Poly::monomial(2)) - 0.25).abs();
    Ok((
        worst <= 1e-7 && x2 <= 1e-12,
        format!("max |t-m|/(1+|m|) = {worst:.2e}, |m(x^2) - 1/4| = {x2:.2e}"),
    ))
}

fn criterion_2() -> Check {
    let q = 0.5f64;
    let (mut worst, mut closed) = (0.0f64, 0.0f64);
    for tau in [0.2, 0.4, 1.0] {
        let cfg = VerifyConfig::monomials(ctx(q), tau, 0.0, 160, 6)?;
        let r = verify(Theorem::RhoInf, &cfg)?;
        for row in &r.rows {
            worst = worst.max(rel_err(row.trace_side, row.measure_side));
        }
        let want = (q.powf(2.0 * tau) - 1.0) / (1.0 + q * q);
        let x = &r.rows[1];
        closed = closed
            .max((x.measure_side - want).abs())
            .max((x.trace_side - want).abs());
    }
    Ok((
        worst <= 1e-7 && closed <= 1e-10,
        format!("max rel err = {worst:.2e}, p = x closed form err = {closed:.2e}"),
    ))
}

fn criterion_3() -> Check {
    let mut worst = 0.0f64;
    let mut masses = 0;
    for (tau, sigma) in [(0.4, 0.6), (0.4, 1.5)] {
        let cfg = VerifyConfig::new(ctx(0.5), tau, sigma, 200, Poly::monomials(6), 1e-6, 0)?;
        let r = verify(Theorem::RhoSigma, &cfg)?;
        for row in &r.rows {
            worst = worst.max(rel_err(row.trace_side, row.measure_side));
        }
        masses += thm6_measure_spec(tau, sigma, &ctx(0.5))?.masses.len();
    }
    Ok((
        worst <= 1e-6 && masses > 0,
        format!("max rel err = {worst:.2e}, discrete masses = {masses}"),
    ))
}

fn criterion_4() -> Check {
    let c = ctx(0.5);
    let mut bailey = 0.0f64;
    for theta in [0.3, PI / 3.0, PI / 2.0, 2.0, 2.9] {
        bailey = bailey.max(bailey_check(theta, 0.4, 0.6, &c)?.residual);
    }
    let mut mass = 0.0f64;
    for (a, b, k) in [(1.6, 0.3, 0), (2.5, -0.2, 1), (-3.0, 0.1, 1)] {
        mass = mass.max(mass_identity_check(a, b, k, &c)?.residual);
    }
    let mut pole = 0.0f64;
    for l in 0..=2 {
        pole = pole.max(poisson_pole_value(l, 0.7, 2.1, 0.6, -0.4, &c)?.norm());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut poisson = 0.0f64;
    for _ in 0..10 {
        let (t, x, y) = (
            rng.gen_range(-0.6..0.6),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let closed = cqh_poisson(t, x, y, &c)?;
        let series = cqh_poisson_series(t, x, y, 400, &c)?;
        poisson = poisson.max((series - closed).abs() / closed.abs().max(1.0));
        let (a, b) = (rng.gen_range(-0.9..0.9), rng.gen_range(-0.9..0.9));
        let closed = asc_poisson(t, x, y, a, b, &c)?;
        let series = asc_poisson_series(t, x, y, a, b, 400, &c)?;
        poisson = poisson.max((series - closed).abs() / closed.abs().max(1.0));
    }
    Ok((
        bailey <= 1e-8 && mass <= 1e-9 && pole <= 1e-9 && poisson <= 1e-9,
        format!("bailey {bailey:.2e}, mass {mass:.2e}, 8W7 pole {pole:.2e}, poisson {poisson:.2e}"),
    ))
}

fn gram_error(n: usize, inner: impl Fn(usize, usize) -> f64) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..=n {
        for j in 0..=i {
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((inner(i, j) - want).abs());
        }
    }
    worst
}

fn measure_gram(m: &qhaar::orthopoly::MeasureSpec, jac: &JacobiCoeffs, n: usize) -> f64 {
    let mut g = vec![vec![0.0; n + 1]; n + 1];
    let mut add = |x: f64, w: f64| {
        let p = jac.orthonormal_polys(n, x);
        for i in 0..=n {
            for j in 0..=i {
                g[i][j] += w * p[i] * p[j];
            }
        }
    };
    for (&x, &w) in m.rule.nodes.iter().zip(&m.rule.weights) {
        add(x, w);
    }
    for mp in &m.masses {
        add(mp.x, mp.weight);
    }
    gram_error(n, |i, j| g[i][j])
}

/// Gram matrix of `c_k(.; q^{2 tau}; q^2) / sqrt(L(c_k^2))` under
/// `L(p) = sum_n q^{2 n tau} q^{n(n-1)} / (q^2;q^2)_n p(q^{-2n})`, summed with
/// every term formed in log space: the unweighted products overflow f64.
fn charlier_gram(tau: f64, n: usize, c: &QContext) -> qhaar::Result<f64> {
    let q = c.q();
    let c2 = c.squared();
    let a = q.powf(2.0 * tau);
    let log_norm: Vec<f64> = (0..=n)
        .map(|k| charlier_norm(k, tau, c).map(|v| 0.5 * v.ln()))
        .collect::<qhaar::Result<_>>()?;
    let mut g = vec![vec![0.0; n + 1]; n + 1];
    let mut log_w = 0.0;
    for m in 0..400 {
        let x = q.powi(-2 * m as i32);
        let vals: Vec<f64> = (0..=n).map(|k| q_charlier(k, x, a, &c2)).collect();
        if vals.iter().any(|v| !v.is_finite()) {
            break;
        }
        for i in 0..=n {
            for j in 0..=i {
                if vals[i] != 0.0 && vals[j] != 0.0 {
                    let lt =
                        log_w + vals[i].abs().ln() + vals[j].abs().ln() - log_norm[i] - log_norm[j];
                    g[i][j] += vals[i].signum() * vals[j].signum() * lt.exp();
                }
            }
        }
        let mf = m as f64;
        log_w += (2.0 * tau + 2.0 * mf) * q.ln() - (1.0 - q.powi(2 * m as i32 + 2)).ln();
    }
    Ok(gram_error(n, |i, j| g[i][j]))
}

fn criterion_5() -> Check {
    let q = 0.5;
    let c = ctx(q);
    let tau = 0.4;
    let n = 200;

    let rep = build_rep(0.7, n, &c)?;
    let m = element(&rep, Element::RhoInf { tau })?;
    let mut eigen = 0.0f64;
    for e in eigen_basis(tau, 0.7, 4, n, &c)? {
        let mv = m.matvec(&e.vector);
        let res: f64 = mv
            .iter()
            .zip(&e.vector)
            .map(|(a, b)| (a - b * e.lambda).norm_sqr())
            .sum::<f64>()
            .sqrt();
        eigen = eigen.max(res / e.norm_sq.sqrt());
    }

    let extremes = rho_inf_extremes(tau, n, 3, &c)?
        .iter()
        .map(|r| r.residual)
        .fold(0.0, f64::max);

    let rule = gauss_legendre(200, 0.0, PI)?;
    let lead = qpoch_inf(q, &c)? / (2.0 * PI);
    let hermite = gram_error(15, |i, j| {
        let norm = (qpoch_n(q, q, i) * qpoch_n(q, q, j)).sqrt();
        lead * rule.integrate(|th| {
            cqh(i, th.cos(), &c) * cqh(j, th.cos(), &c) * cqh_weight(th, &c).unwrap()
        }) / norm
    });
    let charlier = charlier_gram(tau, 15, &c)?;
    let mut asc = 0.0f64;
    for (ap, bp) in [(0.6, -0.4), (1.6, 0.3)] {
        let meas = aw_measure(&AWParams::new(ap, bp, 0.0, 0.0, c)?)?;
        asc = asc.max(measure_gram(&meas, &asc_jacobi(ap, bp, &c), 15));
    }
    let mut aw = 0.0f64;
    for sigma in [0.6, 1.5] {
        let meas = thm6_measure_spec(tau, sigma, &c)?;
        aw = aw.max(measure_gram(&meas, &aw_jacobi(&meas.params), 15));
    }

    let mut variance = 0.0f64;
    for which in [
        Element::Cocentral,
        Element::RhoInf { tau },
        Element::GammaStarGamma,
    ] {
        for deg in [2, 3] {
            let p = Poly::monomial(deg);
            let vals: Vec<f64> = (0..7)
                .map(|k| trace_at_phi(which, &p, 0.37 + 0.9 * k as f64, 120, &c).map(|v| v.re))
                .collect::<qhaar::Result<_>>()?;
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / vals.len() as f64;
            variance = variance.max(var);
        }
    }

    let gram = hermite.max(charlier).max(asc).max(aw);
    Ok((
        eigen <= 1e-9 && extremes <= 1e-6 && gram <= 1e-8 && variance <= 1e-10,
        format!(
            "eigen {eigen:.2e}, extremes {extremes:.2e}, gram hermite {hermite:.2e} \
             charlier {charlier:.2e} asc {asc:.2e} aw {aw:.2e}, phi variance {variance:.2e}"
        ),
    ))
}

fn criterion_6() -> Check {
    let mut worst = 0.0f64;
    for (q, tau, sigma, phi) in [
        (0.5, 0.4, 0.6, 0.9),
        (0.7, 1.3, 0.25, 4.0),
        (0.5, 0.4, 1.5, 2.2),
    ] {
        worst = worst.max(verify_structure(tau, sigma, phi, 150, &ctx(q))?.max());
    }
    Ok((
        worst <= 1e-10,
        format!("max interior residual = {worst:.2e}"),
    ))
}

fn criterion_7() -> Check {
    let mut worst = 0.0f64;
    let mut one = 0.0f64;
    for (q, n) in [(0.5, 120), (0.8, 200)] {
        let c = ctx(q);
        for m in 0..=6 {
            let p = Poly::monomial(m);
            let h = haar_trace(Element::GammaStarGamma, &p, n, 4 * m + 4, &c)?;
            let want = observation_measure(&p, &c)?;
            worst = worst.max(rel_err(h, want));
            if m == 0 {
                one = one.max((h - 1.0).abs());
            }
        }
    }
    Ok((
        worst <= 1e-9 && one <= 1e-12,
        format!("max rel err = {worst:.2e}, |h(1) - 1| = {one:.2e}"),
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check, Option<f64>); 7] = [
        ("cocentral element vs semicircle", criterion_1, Some(5.0)),
        ("rho_(tau,inf) vs Jackson integral", criterion_2, Some(10.0)),
        (
            "rho_(tau,sigma) vs Askey-Wilson measure",
            criterion_3,
            Some(60.0),
        ),
        ("identity suite", criterion_4, None),
        ("spectral suite", criterion_5, None),
        ("structural suite", criterion_6, None),
        ("gamma*gamma vs q-integral on [0, 1]", criterion_7, None),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        let (ok, detail) = match outcome {
            Ok((ok, detail)) => (ok, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let in_time = budget.map_or(true, |b| secs < b);
        let ok = ok && in_time;
        let limit = budget.map_or(String::new(), |b| format!(" (limit {b} s)"));
        println!(
            "criterion {}: {} [{name}] {detail}; {secs:.2} s{limit}",
            i + 1,
            if ok { "PASS" } else { "FAIL" }
        );
        if !ok {
            failed += 1;
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
