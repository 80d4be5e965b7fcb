use clap::ValueEnum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use qhaar::haarverify::{
    bailey_check, mass_identity_check, poisson_pole_value, rho_inf_extremes, support_check, verify,
    Intermediate, Theorem, BAILEY_THETAS, IDENTITY_TOL, MASS_IDENTITY_TOL,
};
use qhaar::orthopoly::{asc_poisson, asc_poisson_series, cqh_poisson, cqh_poisson_series};
use qhaar::qseries::{phi_rs, SeriesSpec};
use qhaar::qsu2rep::cocentral_tridiag;
use qhaar::spectral::eig;
use qhaar::QContext;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{Cell, Table};

pub const POISSON_TOL: f64 = 1e-9;
pub const POISSON_POINTS: usize = 10;
pub const POISSON_TERMS: usize = 400;
pub const EXTREME_TOL: f64 = 1e-6;
pub const SUPPORT_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VerifyTarget {
    Thm4,
    Thm5,
    Thm6,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IdentityKind {
    Bailey,
    Mass,
    Poisson,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpectrumKind {
    Cocentral,
    RhoInf,
    RhoSigma,
}

/// Result of one command before formatting.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub pass: bool,
    pub body: Value,
    pub table: Table,
    /// Extra lines for the text output.
    pub notes: Vec<String>,
}

fn json_of(v: &impl serde::Serialize) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Write(e.to_string()))
}

pub fn verify_cmd(target: VerifyTarget, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let vcfg = cfg.verify_config()?;
    let theorems: Vec<Theorem> = match target {
        VerifyTarget::Thm4 => vec![Theorem::Cocentral],
        VerifyTarget::Thm5 => vec![Theorem::RhoInf],
        VerifyTarget::Thm6 => vec![Theorem::RhoSigma],
        VerifyTarget::All => Theorem::ALL.to_vec(),
    };
    let mut table = Table::new(&[
        "theorem",
        "poly",
        "trace_side",
        "measure_side",
        "abs_err",
        "rel_err",
        "pass",
    ]);
    let mut notes = Vec::new();
    let mut reports = Vec::new();
    for th in theorems {
        let r = verify(th, &vcfg)?;
        let name = format!("thm{}", th.number());
        for row in &r.rows {
            table.push(vec![
                name.clone().into(),
                row.poly.clone().into(),
                row.trace_side.into(),
                row.measure_side.into(),
                row.abs_err.into(),
                row.rel_err.into(),
                row.pass.into(),
            ]);
        }
        for c in &r.identities {
            notes.push(format!(
                "{name} {}: {:.3e} (bound {:.1e}) {}",
                c.name,
                c.value,
                c.bound,
                if c.pass { "ok" } else { "FAIL" }
            ));
        }
        notes.extend(r.flags.iter().map(|f| format!("{name} note: {f}")));
        reports.push(r);
    }
    let pass = reports.iter().all(|r| r.all_pass());
    Ok(Outcome {
        pass,
        body: json!({ "reports": json_of(&reports)? }),
        table,
        notes,
    })
}

pub fn identity_cmd(kind: IdentityKind, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let ctx = cfg.context()?;
    match kind {
        IdentityKind::Bailey => bailey(cfg, &ctx),
        IdentityKind::Mass => mass(cfg, &ctx),
        IdentityKind::Poisson => poisson(cfg, &ctx),
    }
}

fn bailey(cfg: &RunConfig, ctx: &QContext) -> Result<Outcome, CliError> {
    let mut table = Table::new(&[
        "theta",
        "x",
        "lhs",
        "lhs_printed",
        "rhs",
        "residual",
        "printed_residual",
        "pass",
    ]);
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    let mut pass = true;
    for theta in BAILEY_THETAS {
        let r = bailey_check(theta, cfg.tau, cfg.sigma, ctx)?;
        let ok = r.residual <= IDENTITY_TOL;
        pass &= ok;
        if r.discrepancy(IDENTITY_TOL) && notes.is_empty() {
            notes.push(
                "the prefactor 1/(1 - q^(-2 tau)) fails where 1/(1 + q^(-2 tau)) holds".to_string(),
            );
        }
        table.push(vec![
            theta.into(),
            r.x.into(),
            r.lhs.into(),
            r.lhs_printed.into(),
            r.rhs.into(),
            r.residual.into(),
            r.printed_residual.into(),
            ok.into(),
        ]);
        rows.push(json!({ "theta": theta, "result": json_of(&r)?, "pass": ok }));
    }
    Ok(Outcome {
        pass,
        body: json!({ "tol": IDENTITY_TOL, "rows": rows, "notes": notes }),
        table,
        notes,
    })
}

/// Parameter sets outside the `(tau, sigma)` family, in base `q`.
const MASS_SETS: [(f64, f64, usize); 3] = [(1.6, 0.3, 0), (2.5, -0.2, 1), (-3.0, 0.1, 1)];

fn mass(cfg: &RunConfig, ctx: &QContext) -> Result<Outcome, CliError> {
    let q = ctx.q();
    let mut sets: Vec<(f64, f64, usize, QContext)> = Vec::new();
    if cfg.tau != 0.0 {
        let inter = Intermediate::new(cfg.tau, cfg.sigma, ctx)?;
        for piece in [&inter.dm1, &inter.dm2] {
            for m in &piece.measure.masses {
                let (a, b) = if m.param == 0 {
                    (piece.a, piece.b)
                } else {
                    (piece.b, piece.a)
                };
                sets.push((a, b, m.k, ctx.squared()));
            }
        }
    }
    for (a, b, k) in MASS_SETS {
        if (a * q.powi(k as i32)).abs() > 1.0 {
            sets.push((a, b, k, *ctx));
        }
    }
    let mut table = Table::new(&["a", "b", "k", "base", "lhs", "rhs", "residual", "pass"]);
    let mut rows = Vec::new();
    let mut pass = true;
    for (a, b, k, base) in sets {
        let r = mass_identity_check(a, b, k, &base)?;
        let ok = r.residual <= MASS_IDENTITY_TOL;
        pass &= ok;
        table.push(vec![
            a.into(),
            b.into(),
            k.into(),
            base.q().into(),
            r.lhs.into(),
            r.rhs.into(),
            r.residual.into(),
            ok.into(),
        ]);
        rows.push(json!({
            "a": a, "b": b, "k": k, "base": base.q(), "result": json_of(&r)?, "pass": ok
        }));
    }
    Ok(Outcome {
        pass,
        body: json!({ "tol": MASS_IDENTITY_TOL, "rows": rows }),
        table,
        notes: Vec::new(),
    })
}

fn poisson(cfg: &RunConfig, ctx: &QContext) -> Result<Outcome, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut table = Table::new(&[
        "family", "t", "x", "y", "a", "b", "series", "closed", "residual", "pass",
    ]);
    let mut rows = Vec::new();
    let mut pass = true;
    let mut record = |family: String, vals: [f64; 7], table: &mut Table| {
        let [t, x, y, a, b, series, closed] = vals;
        let residual = (series - closed).abs() / closed.abs().max(1.0);
        let ok = residual <= POISSON_TOL;
        pass &= ok;
        let mut row: Vec<Cell> = vec![family.clone().into()];
        row.extend(vals.iter().map(|&v| Cell::from(v)));
        row.push(residual.into());
        row.push(ok.into());
        table.push(row);
        rows.push(json!({
            "family": family, "t": t, "x": x, "y": y, "a": a, "b": b,
            "series": series, "closed": closed, "residual": residual, "pass": ok
        }));
    };
    for _ in 0..POISSON_POINTS {
        let t = rng.gen_range(-0.6..0.6);
        let x = rng.gen_range(-1.0..1.0);
        let y = rng.gen_range(-1.0..1.0);
        let series = cqh_poisson_series(t, x, y, POISSON_TERMS, ctx)?;
        let closed = cqh_poisson(t, x, y, ctx)?;
        record(
            "q-hermite".into(),
            [t, x, y, 0.0, 0.0, series, closed],
            &mut table,
        );
    }
    for _ in 0..POISSON_POINTS {
        let t = rng.gen_range(-0.6..0.6);
        let x = rng.gen_range(-1.0..1.0);
        let y = rng.gen_range(-1.0..1.0);
        let a = rng.gen_range(-0.9..0.9);
        let b = rng.gen_range(-0.9..0.9);
        let series = asc_poisson_series(t, x, y, a, b, POISSON_TERMS, ctx)?;
        let closed = asc_poisson(t, x, y, a, b, ctx)?;
        record(
            "al-salam-chihara".into(),
            [t, x, y, a, b, series, closed],
            &mut table,
        );
    }
    for l in 0..=2 {
        let theta = rng.gen_range(0.0..std::f64::consts::PI);
        let psi = rng.gen_range(0.0..std::f64::consts::PI);
        let a = rng.gen_range(0.2..0.9);
        let b = rng.gen_range(-0.9..-0.2);
        let v = poisson_pole_value(l, theta, psi, a, b, ctx)?;
        let (x, y) = (theta.cos(), psi.cos());
        record(
            format!("8w7-pole-l{l}"),
            [0.0, x, y, a, b, v.norm(), 0.0],
            &mut table,
        );
    }
    Ok(Outcome {
        pass,
        body: json!({ "tol": POISSON_TOL, "terms": POISSON_TERMS, "rows": rows }),
        table,
        notes: Vec::new(),
    })
}

pub fn spectrum_cmd(kind: SpectrumKind, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let ctx = cfg.context()?;
    let n = cfg.trunc_n;
    let mut table = Table::new(&["node", "eigenvalue", "expected", "residual", "pass"]);
    let mut rows = Vec::new();
    let mut push = |label: String, eigenvalue: f64, expected: f64, residual: f64, ok: bool| {
        table.push(vec![
            label.clone().into(),
            eigenvalue.into(),
            expected.into(),
            residual.into(),
            ok.into(),
        ]);
        rows.push(json!({
            "node": label, "eigenvalue": eigenvalue, "expected": expected,
            "residual": residual, "pass": ok
        }));
        ok
    };
    let mut pass = true;
    match kind {
        SpectrumKind::Cocentral => {
            let mut nodes = eig(&cocentral_tridiag(n, &ctx)?)?.nodes;
            nodes.sort_by(f64::total_cmp);
            let len = nodes.len();
            let picks = (0..3)
                .map(|k| (format!("low{k}"), nodes[k], -1.0))
                .chain((0..3).map(|k| (format!("high{k}"), nodes[len - 1 - k], 1.0)));
            // only the inclusion in [-1, 1] is exact at finite N
            for (label, x, edge) in picks {
                let outside = (x.abs() - 1.0).max(0.0);
                pass &= push(label, x, edge, outside, outside == 0.0);
            }
        }
        SpectrumKind::RhoInf => {
            let extremes = rho_inf_extremes(cfg.tau, n, 3, &ctx)?;
            for (i, r) in extremes.iter().enumerate() {
                let label = if i < 3 {
                    format!("neg{i}")
                } else {
                    format!("pos{}", i - 3)
                };
                pass &= push(
                    label,
                    r.eigenvalue,
                    r.expected,
                    r.residual,
                    r.residual <= EXTREME_TOL,
                );
            }
        }
        SpectrumKind::RhoSigma => {
            let s = support_check(cfg.tau, cfg.sigma, n, &ctx)?;
            for (i, &m) in s.masses.iter().enumerate() {
                let nearest = s
                    .outside
                    .iter()
                    .copied()
                    .min_by(|a, b| (a - m).abs().total_cmp(&(b - m).abs()))
                    .unwrap_or(f64::NAN);
                let r = (nearest - m).abs();
                pass &= push(format!("mass{i}"), nearest, m, r, r <= EXTREME_TOL);
            }
            pass &= push(
                "support_distance".into(),
                s.max_distance,
                0.0,
                s.max_distance,
                s.max_distance <= SUPPORT_TOL,
            );
            pass &= s.outside.len() == s.masses.len();
        }
    }
    Ok(Outcome {
        pass,
        body: json!({ "truncation": n, "rows": rows }),
        table,
        notes: Vec::new(),
    })
}

pub fn eval_series_cmd(
    upper: &[f64],
    lower: &[f64],
    z: f64,
    base: Option<f64>,
    cfg: &RunConfig,
) -> Result<Outcome, CliError> {
    let ctx = match base {
        Some(b) => QContext::new(b)?,
        None => cfg.context()?,
    };
    let v = phi_rs(&SeriesSpec::real(upper, lower, z, ctx))?;
    let mut table = Table::new(&["re", "im"]);
    table.push(vec![v.re.into(), v.im.into()]);
    Ok(Outcome {
        pass: true,
        body: json!({
            "upper": upper, "lower": lower, "z": z, "base": ctx.q(),
            "re": v.re, "im": v.im
        }),
        table,
        notes: Vec::new(),
    })
}
