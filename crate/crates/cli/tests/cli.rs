use std::io::Write as _;
use std::process::{Command, Output};

use sphereopt_cli::Report;

fn sphereopt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sphereopt"))
        .args(args)
        .env_remove("SPHEREOPT_MAX_P")
        .output()
        .expect("binary runs")
}

fn reports(out: &Output) -> Vec<Report> {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn diagonal_quadratic() {
    let r = reports(&sphereopt(&["--poly", "x1^2+2*x2^2", "--level", "1", "--oracle"]));
    assert_eq!(r.len(), 1);
    assert!((r[0].nu_ell - 2.0).abs() < 1e-7);
    assert!((r[0].oracle_value.unwrap() - 2.0).abs() < 1e-9);
    assert!(r[0].nu_tilde <= r[0].nu_ell + 1e-7);
    assert_eq!((r[0].n, r[0].d, r[0].level), (2, 2, 1));
}

#[test]
fn cube_goes_through_odd_lift() {
    let r = reports(&sphereopt(&["--poly", "x1^3", "--level", "3", "--oracle"]));
    let rep = &r[0];
    assert_eq!(rep.reduction, "odd-lift");
    assert_eq!((rep.n, rep.d, rep.solved_n, rep.solved_d), (1, 3, 2, 4));
    assert!((rep.gamma - 3.0 * 3f64.sqrt() / 16.0).abs() < 1e-15);
    assert!(rep.nu_tilde <= 1.0 + 1e-7 && 1.0 <= rep.nu_ell + 1e-7);
    assert!((rep.oracle_value.unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn level_range_emits_ascending_lines() {
    let r = reports(&sphereopt(&["--poly", "x1^4 - 2*x1^2*x2^2 + 0.5*x3^4", "--level", "2..4"]));
    let levels: Vec<usize> = r.iter().map(|x| x.level).collect();
    assert_eq!(levels, vec![2, 3, 4]);
    for w in r.windows(2) {
        assert!(w[0].nu_ell >= w[1].nu_ell - 1e-7);
    }
    for x in &r {
        assert!(x.nu_tilde <= x.nu_ell + 1e-7);
    }
}

#[test]
fn single_variable_even_input_is_rejected() {
    let out = sphereopt(&["--poly", "x1^4", "--level", "2..4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn parse_errors_exit_two() {
    let out = sphereopt(&["--poly", "x1^", "--level", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("offset 3"));
    for bad in [
        vec!["--poly", "x1^2 + x2", "--level", "1"],
        vec!["--poly", "x1^2 + x2^2", "--level", "0"],
        vec!["--poly", "x1^2 + x2^2", "--level", "3..2"],
        vec!["--poly", "x1^2*x2^2", "--level", "1"],
        vec!["--poly", "x1^2 + x2^2", "--tol", "1"],
        vec!["--poly", "x1^2 - x1^2 + 0*x2^2", "--level", "1"],
        vec!["--poly", "{\"n\":2,\"terms\":[{\"coeff\":1,\"exps\":[2]}]}", "--level", "1"],
        vec!["--level", "1"],
    ] {
        assert_eq!(sphereopt(&bad).status.code(), Some(2), "{bad:?}");
    }
}

#[test]
fn resource_guard_exits_four() {
    let out = Command::new(env!("CARGO_BIN_EXE_sphereopt"))
        .args(["--poly", "x1^2 + x2^2 + x3^2", "--level", "3"])
        .env("SPHEREOPT_MAX_P", "5")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    let out = Command::new(env!("CARGO_BIN_EXE_sphereopt"))
        .args(["--poly", "x1^2 + x2^2", "--level", "1"])
        .env("SPHEREOPT_MAX_P", "lots")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solver_failure_exits_three() {
    // the circle cone at this level is beyond double precision
    let out = sphereopt(&["--poly", "x1^6 - x1^3*x2^3", "--level", "80"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn identical_runs_are_byte_identical() {
    let args = ["--poly", "x1^3*x2 - x2^2*x3^2 + 0.3*x3^4", "--level", "2..3", "--oracle", "--seed", "7", "--certificate"];
    let a = sphereopt(&args);
    let b = sphereopt(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn json_file_input_matches_inline_text() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    write!(
        file,
        r#"{{"n":3,"terms":[{{"coeff":3.5,"exps":[2,0,0]}},{{"coeff":-1,"exps":[0,1,1]}}]}}"#
    )
    .unwrap();
    let path = file.path().to_str().unwrap();
    let from_file = sphereopt(&["--input", path, "--level", "2"]);
    let inline = sphereopt(&["--poly", "3.5*x1^2 - x2*x3", "--level", "2"]);
    assert!(from_file.status.success());
    assert_eq!(from_file.stdout, inline.stdout);
    // explicit n widens text input but must agree with a JSON header
    let wide = reports(&sphereopt(&["--poly", "3.5*x1^2 - x2*x3", "--n", "4", "--level", "1"]));
    assert_eq!(wide[0].n, 4);
    assert_eq!(sphereopt(&["--input", path, "--n", "4", "--level", "1"]).status.code(), Some(2));
}

#[test]
fn default_level_is_echoed() {
    // a = 1, n = 2: ε = 4/(2ℓ+2) ≤ 1/2 first at ℓ = 3
    let r = reports(&sphereopt(&["--poly", "x1^2 - x1*x2"]));
    assert_eq!(r[0].level, 3);
}

#[test]
fn text_format() {
    let out = sphereopt(&["--poly", "x1^2+2*x2^2", "--level", "1", "--format", "text", "--oracle"]);
    assert!(out.status.success());
    let s = String::from_utf8(out.stdout).unwrap();
    assert!(s.starts_with("level 1 (n = 2, d = 2, even-homogenize)"));
    assert!(s.contains("nu_ell") && s.contains("oracle"));
}

#[test]
fn certificate_reproduces_the_gap() {
    let r = reports(&sphereopt(&["--poly", "x1^4 - 3*x1*x2^3 + x2^2*x3^2", "--level", "3", "--certificate"]));
    let cert = r[0].certificate.as_ref().unwrap();
    assert!((cert.t - r[0].nu_ell).abs() < 1e-6);
    let eval = |terms: &[sphereopt_cli::input::TermJson], x: &[f64]| -> f64 {
        terms
            .iter()
            .map(|t| t.coeff * t.exps.iter().zip(x).map(|(&e, v)| v.powi(e as i32)).product::<f64>())
            .sum()
    };
    let obj = |x: &[f64]| x[0].powi(4) - 3.0 * x[0] * x[1].powi(3) + x[1].powi(2) * x[2].powi(2);
    for x in [[0.6, 0.0, 0.8], [0.48, 0.6, 0.64], [-1.0, 0.0, 0.0]] {
        let sum: f64 = cert.squares.iter().map(|s| s.weight * eval(&s.terms, &x).powi(2)).sum();
        assert!((cert.t - obj(&x) - sum).abs() < 1e-6);
    }
}

#[test]
fn constant_needs_explicit_dimension() {
    assert_eq!(sphereopt(&["--poly", "7", "--level", "1"]).status.code(), Some(2));
    let r = reports(&sphereopt(&["--poly", "7", "--n", "2", "--level", "2"]));
    assert!((r[0].nu_ell - 7.0).abs() < 1e-7 && (r[0].nu_tilde - 7.0).abs() < 1e-7);
}
