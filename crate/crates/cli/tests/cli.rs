use std::process::{Command, Output};

fn drem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_drem"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn list_builtins_names_every_scenario() {
    let o = drem(&["list-builtins"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for name in [
        "gradient-gamma3",
        "drem-gamma3",
        "monotone-scalar-gamma5",
        "linearised-scalar",
        "pe-probe-decaying",
    ] {
        assert!(text.contains(name), "{name}");
    }
}

#[test]
fn run_builtin_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = drem(&[
        "run",
        "drem-gamma3",
        "--summary",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("decay_factor"));
    let csv = std::fs::read_to_string(dir.path().join("drem-gamma3.csv")).unwrap();
    assert!(csv.starts_with("t,theta_hat_1,theta_hat_2,theta_tilde_1,theta_tilde_2,phi,energy\n"));
    assert_eq!(csv.lines().count(), 10_002);
}

#[test]
fn run_sweep_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.json");
    std::fs::write(
        &cfg,
        r#"[{
            "name": "small-sweep", "kind": "drem_linear",
            "regressor": {"builtin": "decaying"},
            "operators": [{"lti": {"num": [1.0], "den": [1.0, 1.0]}}],
            "gains": 3.0, "theta_true": [-3.0, 3.0], "theta_hat0": [-3.0, 3.0],
            "sweep": {"radius": 1.0, "count": 3},
            "grid": {"t0": 0.0, "dt": 0.01, "t_end": 1.0},
            "output": "sweep.csv"
        }]"#,
    )
    .unwrap();
    let o = drem(&[
        "run",
        cfg.to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for k in 0..3 {
        assert!(dir.path().join(format!("sweep-{k}.csv")).exists());
    }
}

#[test]
fn invalid_config_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"name": "bad", "kind": "drem_linear"}"#).unwrap();
    let o = drem(&[
        "run",
        cfg.to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("regressor") && err.contains("grid"), "{err}");

    assert_eq!(drem(&["run", "no-such-builtin"]).status.code(), Some(1));
}

#[test]
fn check_pe_reports_decay() {
    let o = drem(&["check-pe", "pe-probe-decaying"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("decreasing per window  true"), "{text}");
}

#[test]
fn energy_matches_linear_example() {
    let o = drem(&["energy", "drem-gamma3", "--from", "0", "--to", "10"]);
    assert!(o.status.success());
    let e: f64 = stdout(&o).trim().parse().unwrap();
    assert!((e - 0.7767).abs() < 1e-3, "{e}");

    let o = drem(&["energy", "gradient-gamma3", "--from", "0", "--to", "1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn verify_prints_one_line_per_criterion() {
    let o = drem(&["verify"]);
    let text = stdout(&o);
    let lines = text
        .lines()
        .filter(|l| l.starts_with("PASS") || l.starts_with("FAIL"))
        .count();
    assert_eq!(lines, 14);
    assert_eq!(
        o.status.code(),
        Some(if text.contains("FAIL") { 3 } else { 0 })
    );
}
