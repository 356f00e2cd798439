use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nehari"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn run(args: &[&str]) -> Output {
    run_in(Path::new(env!("CARGO_MANIFEST_DIR")), args)
}

fn report(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn num(v: &Value, key: &str) -> f64 {
    v["results"][key]
        .as_f64()
        .unwrap_or_else(|| panic!("{key} missing"))
}

fn keys(v: &Value) -> Vec<String> {
    fn walk(v: &Value, prefix: &str, out: &mut Vec<String>) {
        if let Some(map) = v.as_object() {
            for (k, x) in map {
                let path = format!("{prefix}/{k}");
                out.push(path.clone());
                if k != "timings" {
                    walk(x, &path, out);
                }
            }
        }
    }
    let mut out = Vec::new();
    walk(v, "", &mut out);
    out
}

#[test]
fn norm_examples() {
    let r = report(&["norm", "--input", &fixture("constant.sym")]);
    assert_eq!(num(&r, "d"), 2.0);
    let r = report(&["norm", "--input", &fixture("lag.sym")]);
    assert!((num(&r, "d") - 4.0 / 3.0).abs() <= 1e-9);
    assert!(num(&r, "tail_bound") < 1e-11);
    assert_eq!(r["input"]["kind"], "rational");
    assert_eq!(r["params"]["seed"], 42);
}

#[test]
fn missing_file_is_an_input_error() {
    let out = run(&["norm", "--input", "does/not/exist.sym"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("exist.sym"));
}

#[test]
fn parse_errors_carry_line_numbers() {
    let out = run(&["approx", "--input", &fixture("duplicate.sym")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));
}

#[test]
fn approx_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fopt.sym");
    let csv = dir.path().join("res.csv");
    report(&[
        "approx",
        "--input",
        &fixture("hperp_plus.sym"),
        "--out",
        out.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.lines().any(|l| l == "coeff 2 3 0"), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("coeff")).count(), 1);

    let r = report(&[
        "approx",
        "--input",
        &fixture("golden.sym"),
        "--residual-csv",
        csv.to_str().unwrap(),
    ]);
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("omega,abs_residual"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len() as u64, r["params"]["grid"].as_u64().unwrap());
    assert!(rows.iter().all(|&(_, m)| (m - golden).abs() <= 1e-6));
    assert_eq!(rows[1].0, std::f64::consts::TAU / rows.len() as f64);
}

#[test]
fn approx_flatness_on_rational_symbol() {
    let r = report(&["approx", "--input", &fixture("lag.sym")]);
    assert!(num(&r, "flatness_dev") <= 1e-6);
    assert_eq!(r["results"]["flags"]["non_flat"], false);
}

#[test]
fn strict_mode_exit_code() {
    let args = [
        "approx",
        "--input",
        &fixture("hilbert_tail.sym"),
        "--order",
        "1",
    ];
    assert_eq!(run(&args).status.code(), Some(0));
    let mut strict = args.to_vec();
    strict.push("--strict");
    let out = run(&strict);
    assert_eq!(out.status.code(), Some(4));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["results"]["flags"]["non_flat"], true);
}

#[test]
fn certify_examples() {
    let r = report(&[
        "certify",
        "--input",
        &fixture("constant.sym"),
        "--iters",
        "2000",
    ]);
    assert!(num(&r, "gap").abs() <= 1e-9);
    assert!((num(&r, "dual_pairing_re") - num(&r, "d")).abs() <= 1e-12);

    let r = report(&[
        "certify",
        "--input",
        &fixture("anticausal.sym"),
        "--iters",
        "2000",
    ]);
    assert_eq!(num(&r, "d"), 0.0);
    assert!(num(&r, "primal_value") <= 1e-9);
    assert_eq!(r["results"]["flags"]["rank_zero"], true);
}

#[test]
fn factor_examples() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.csv");
    let r = report(&["factor", "--input", &fixture("shift.sym")]);
    assert!(num(&r, "product_residual") <= 1e-10);
    assert!(num(&r, "norm_residual") <= 1e-10);
    let r = report(&[
        "factor",
        "--input",
        &fixture("square.sym"),
        "--p-csv",
        p.to_str().unwrap(),
    ]);
    assert!(num(&r, "product_residual") <= 1e-8);
    assert!(num(&r, "norm_residual") <= 1e-8);
    let text = std::fs::read_to_string(&p).unwrap();
    assert!(text.starts_with("omega,re,im\n"));
    assert_eq!(
        text.lines().count() as u64,
        r["params"]["grid"].as_u64().unwrap() + 1
    );

    // Degree six with v-roots of modulus 0.5 (four) and 2 (two).
    let poly = dir.path().join("poly.sym");
    let f = nehari::symbol::laurent_spec(
        &[0.5f64, 0.5, 2.0, 2.0, 0.5, 0.5].iter().enumerate().fold(
            nehari::Series64::constant(nehari::Complex64::new(0.7, -0.2)),
            |acc, (j, &r)| {
                let root = nehari::Complex64::from_polar(r, j as f64);
                acc.multiply(&nehari::Series64::new(
                    -1,
                    vec![-root.inv(), nehari::Complex64::new(1.0, 0.0)],
                ))
            },
        ),
        None,
    );
    std::fs::write(&poly, nehari::render_sym(&f)).unwrap();
    let r = report(&["factor", "--input", poly.to_str().unwrap()]);
    assert!(num(&r, "product_residual") <= 1e-6);
    assert!(num(&r, "norm_residual") <= 1e-6);
    assert_eq!(num(&r, "disk_zeros") as usize, 4);
}

#[test]
fn factor_rejections() {
    assert_eq!(
        run(&["factor", "--input", &fixture("circle_root.sym")])
            .status
            .code(),
        Some(5)
    );
    assert_eq!(
        run(&["factor", "--input", &fixture("hperp_plus.sym")])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn non_convergence_exit_code() {
    let out = run(&["norm", "--input", &fixture("near_degenerate.sym")]);
    assert_eq!(out.status.code(), Some(3));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["results"]["flags"]["not_converged"], true);
}

#[test]
fn schema_is_shared_by_all_commands() {
    let golden = fixture("golden.sym");
    let square = fixture("square.sym");
    let reports = [
        report(&["norm", "--input", &golden]),
        report(&["approx", "--input", &golden]),
        report(&["certify", "--input", &golden, "--iters", "500"]),
        report(&["factor", "--input", &square]),
    ];
    let reference = keys(&reports[0]);
    for r in &reports {
        assert_eq!(keys(r), reference);
        assert_eq!(r["timings"], serde_json::json!({}));
    }
    let top: Vec<&String> = reports[0].as_object().unwrap().keys().collect();
    assert_eq!(top, ["command", "input", "params", "results", "timings"]);
}

#[test]
fn timings_are_opt_in() {
    let r = report(&["norm", "--input", &fixture("golden.sym"), "--timings"]);
    assert!(r["timings"]["compute_ms"].as_f64().unwrap() >= 0.0);
}

#[test]
fn config_file_layers_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("nehari.toml"), "order = 8\nseed = 5\n").unwrap();
    let golden = fixture("golden.sym");
    let out = run_in(dir.path(), &["norm", "--input", &golden]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["params"]["order"], 8);
    assert_eq!(v["params"]["seed"], 5);
    let out = run_in(dir.path(), &["norm", "--input", &golden, "--order", "12"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["params"]["order"], 12);

    let other = dir.path().join("other.toml");
    std::fs::write(&other, "grid = 2048\n").unwrap();
    let out = run_in(
        dir.path(),
        &[
            "approx",
            "--input",
            &golden,
            "--config",
            other.to_str().unwrap(),
        ],
    );
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["params"]["grid"], 2048);
    assert_eq!(v["params"]["order"], 32);

    std::fs::write(&other, "bogus = 1\n").unwrap();
    let out = run_in(
        dir.path(),
        &[
            "norm",
            "--input",
            &golden,
            "--config",
            other.to_str().unwrap(),
        ],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn defaults_follow_causal_width() {
    let r = report(&["approx", "--input", &fixture("lag.sym")]);
    let width =
        (r["input"]["n_hi"].as_i64().unwrap() - r["input"]["n_lo"].as_i64().unwrap() + 1) as u64;
    let order = (4 * width).max(32);
    assert_eq!(r["params"]["order"].as_u64(), Some(order));
    assert_eq!(
        r["params"]["grid"].as_u64(),
        Some(8 * (2 * order).next_power_of_two())
    );
}
