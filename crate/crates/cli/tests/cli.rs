use std::fs;
use std::process::{Command, Output};

fn ghz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ghz-qkd"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn run_prints_json_report() {
    let o = ghz(&["run", "--n", "8", "--sessions", "200", "--seed", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["sessions"], 200);
    assert_eq!(report["key_agreement"]["rate"], 1.0);
    assert_eq!(report["config"]["attack"], "none");
}

#[test]
fn run_writes_csv_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.csv");
    let o = ghz(&[
        "run",
        "--attack",
        "entangle-cnot",
        "--sessions",
        "100",
        "--format",
        "csv",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("metric,count,samples,value,std_error,analytic\n"));
    assert!(text.contains("\ndetection,"));
}

#[test]
fn usage_errors_exit_2_without_writing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never.json");
    let out = out.to_str().unwrap();
    for args in [
        vec!["run", "--n", "0", "--out", out],
        vec!["run", "--attack", "mitm", "--out", out],
        vec!["run", "--t-c", "1", "--out", out],
        vec!["run", "--attack-probability", "1.5", "--out", out],
        vec!["run", "--format", "xml", "--out", out],
        vec!["run", "--oracle-check", "nope", "--out", out],
        vec!["run", "--config", "/nonexistent/cfg", "--out", out],
        vec!["oracle", "nope"],
        vec!["frobnicate"],
    ] {
        let o = ghz(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
    assert!(!dir.path().join("never.json").exists());
}

#[test]
fn config_file_is_read_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        "# sample\nn = 6\nsessions = 50\nattack = intercept-ba\nseed = 2\n",
    )
    .unwrap();
    let o = ghz(&["run", "--config", cfg.to_str().unwrap(), "--sessions", "30"]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["config"]["n"], 6);
    assert_eq!(report["config"]["attack"], "intercept-ba");
    assert_eq!(report["sessions"], 30);
}

#[test]
fn oracle_prints_exact_table() {
    let o = ghz(&["oracle", "entangle-coin1", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let table: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let cells = table["cells"].as_object().unwrap();
    let total: f64 = cells.values().map(|v| v.as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12);
    assert_eq!(cells.len(), 4);

    let o = ghz(&["oracle", "honest-coin0"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("phi+"));
}

#[test]
fn oracle_check_passes() {
    let o = ghz(&[
        "run",
        "--oracle-check",
        "intercept-ab-coin0",
        "--sessions",
        "20000",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn selftest_exits_zero() {
    let o = ghz(&["selftest", "--samples", "20000"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("[FAIL]"));
}

#[test]
fn same_seed_gives_identical_bytes() {
    let args = [
        "run",
        "--attack",
        "intercept-ba",
        "--n",
        "5",
        "--sessions",
        "3000",
        "--seed",
        "77",
    ];
    let a = ghz(&args);
    let b = ghz(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = ghz(&[&args[..8], &["78"]].concat());
    assert_ne!(a.stdout, c.stdout);
}
