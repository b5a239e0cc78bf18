use std::path::Path;
use std::process::{Command, Output};

fn harness(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_walsh-harness")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn verify_passes_and_exits_zero() {
    let o = harness(&["verify", "--res", "1..3", "--trials", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("all checks passed"));
}

#[test]
fn fault_injection_exits_one() {
    let o = harness(&["verify", "--res", "3", "--fault-injection"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("checks failed"));
}

#[test]
fn bad_arguments_exit_two() {
    let o = harness(&["converge", "--res", "4", "--source", "sawtooth(3)"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn reports_export_to_csv() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("lie.json");
    let csv = dir.path().join("lie.csv");
    let o = harness(&["lie", "--res", "3", "--trials", "1", "--out", json.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = harness(&["export", json.to_str().unwrap(), "--out", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.lines().count() > 1);
    assert!(text.contains("Bessel constant"));
}

#[test]
fn config_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"res_min": 4, "res_max": 4, "source": "indicator(0,1/3)"}"#).unwrap();
    let out = dir.path().join("c.json");
    let o = harness(&[
        "converge",
        "--config",
        cfg.to_str().unwrap(),
        "--n0",
        "4",
        "--eps",
        "0.1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(Path::new(&out).exists());
}

#[test]
fn norms_report_lower_bound() {
    let o = harness(&["norms", "--res", "2..4", "--trials", "1", "--float"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("lower bound"));
}
