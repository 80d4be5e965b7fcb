use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

fn qhaar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qhaar"))
        .args(args)
        .env_remove("QHAAR_THREADS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn row<'a>(report: &'a Value, poly: &str) -> &'a Value {
    report["rows"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["poly"] == poly)
        .unwrap()
}

#[test]
fn thm4_second_moment_is_a_quarter() {
    let out = qhaar(&["verify", "thm4", "--q", "0.5", "--max-degree", "6"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["pass"], true);
    let r = row(&v["body"]["reports"][0], "x^2");
    assert!((r["measure_side"].as_f64().unwrap() - 0.25).abs() < 1e-15);
    assert!((r["trace_side"].as_f64().unwrap() - 0.25).abs() < 1e-7);
}

#[test]
fn thm5_first_moment_closed_form() {
    let out = qhaar(&[
        "verify",
        "thm5",
        "--q",
        "0.5",
        "--tau",
        "0.4",
        "--max-degree",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let want = (0.5f64.powf(0.8) - 1.0) / 1.25;
    let r = row(&v["body"]["reports"][0], "x");
    for side in ["measure_side", "trace_side"] {
        assert!(
            (r[side].as_f64().unwrap() - want).abs() < 1e-10,
            "{side}: {r}"
        );
    }
}

#[test]
fn truncation_policy_exits_three() {
    let out = qhaar(&["verify", "all", "--q", "0.99", "--trunc-n", "50"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("too small"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(qhaar(&["verify", "thm7"]).status.code(), Some(2));
    assert_eq!(
        qhaar(&["verify", "thm4", "--q", "1.5"]).status.code(),
        Some(2)
    );
    assert_eq!(qhaar(&[]).status.code(), Some(2));
    assert_eq!(qhaar(&["--help"]).status.code(), Some(0));
}

#[test]
fn failing_check_exits_one() {
    // phi grid exact, truncation admissible, but a tolerance no float can meet
    let out = qhaar(&[
        "verify",
        "thm5",
        "--max-degree",
        "4",
        "--tol",
        "1e-300",
        "--trunc-n",
        "600",
    ]);
    assert_eq!(
        out.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(json(&out)["pass"], false);
}

#[test]
fn non_convergent_series_exits_three() {
    let out = qhaar(&[
        "eval-series",
        "--upper",
        "0.5,0.3",
        "--lower",
        "0.2",
        "--z",
        "3.0",
    ]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn json_is_byte_identical_across_runs_and_threads() {
    let args = ["identity", "poisson", "--seed", "11"];
    let a = qhaar(&args);
    let b = Command::new(env!("CARGO_BIN_EXE_qhaar"))
        .args(args)
        .env("QHAAR_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = qhaar(&["identity", "poisson", "--seed", "12"]);
    assert_ne!(a.stdout, c.stdout);

    let t1 = qhaar(&["verify", "thm6", "--max-degree", "2", "--trunc-n", "60"]);
    let t2 = Command::new(env!("CARGO_BIN_EXE_qhaar"))
        .args(["verify", "thm6", "--max-degree", "2", "--trunc-n", "60"])
        .env("QHAAR_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(t1.stdout, t2.stdout);
}

#[test]
fn bad_thread_count_is_usage_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_qhaar"))
        .args(["spectrum", "rho-inf"])
        .env("QHAAR_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn floats_carry_seventeen_digits() {
    let out = qhaar(&["spectrum", "rho-inf", "--trunc-n", "100"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"q\": 5.0000000000000000e-1"), "{text}");
}

#[test]
fn config_file_with_flag_override() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "q = 0.3\ntau = 1.0\nmax_degree = 2\noutput = \"csv\"").unwrap();
    let path = f.path().to_str().unwrap();
    let out = qhaar(&["verify", "thm5", "--config", path, "--tau", "0.2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("theorem,poly,trace_side,measure_side,abs_err,rel_err,pass")
    );
    // p = x at q = 0.3, tau = 0.2: (q^{0.4} - 1)/(1 + q^2)
    let want = (0.3f64.powf(0.4) - 1.0) / 1.09;
    let x: Vec<&str> = lines.nth(1).unwrap().split(',').collect();
    assert_eq!(x[1], "x");
    assert!((x[3].parse::<f64>().unwrap() - want).abs() < 1e-12);

    let mut bad = tempfile::NamedTempFile::new().unwrap();
    writeln!(bad, "q = 0.3\nunknown = 1").unwrap();
    let out = qhaar(&["verify", "thm4", "--config", bad.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn identities_pass_at_defaults() {
    for which in ["bailey", "mass", "poisson"] {
        let out = qhaar(&["identity", which, "--sigma", "1.5"]);
        assert_eq!(out.status.code(), Some(0), "{which}");
    }
    let v = json(&qhaar(&["identity", "bailey"]));
    assert!(!v["body"]["notes"].as_array().unwrap().is_empty());
}

#[test]
fn spectra() {
    for which in ["cocentral", "rho-inf", "rho-sigma"] {
        let out = qhaar(&["spectrum", which, "--sigma", "1.5", "--trunc-n", "200"]);
        assert_eq!(out.status.code(), Some(0), "{which}");
    }
}

#[test]
fn eval_series_geometric() {
    // 1 phi 0 (a;-;q,z) = (az;q)_inf / (z;q)_inf; with a = 0 it is 1/(z;q)_inf
    let out = qhaar(&["eval-series", "--upper", "0", "--z", "0.3", "--base", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let want: f64 = 1.0
        / (0..200)
            .map(|k| 1.0 - 0.3 * 0.5f64.powi(k))
            .product::<f64>();
    assert!((v["body"]["re"].as_f64().unwrap() - want).abs() < 1e-14);
}

#[test]
fn text_output_reports_wall_time() {
    let out = qhaar(&["verify", "thm4", "--max-degree", "2", "--output", "text"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("wall time"));
    assert!(text.contains("result: PASS"));
    let js = json(&qhaar(&[
        "verify",
        "thm4",
        "--max-degree",
        "2",
        "--timings",
    ]));
    assert!(js["wall_time_s"].as_f64().is_some());
}
