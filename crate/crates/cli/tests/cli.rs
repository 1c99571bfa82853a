use std::path::Path;
use std::process::{Command, Output};

use conemcf::io::{read_timeseries, write_timeseries};

const CONFIG: &str = r#"
n = 2
[cone]
type = "round"
rho = 0.5
[mesh]
nr = 12
ntheta = 12
[time]
t_end = 1.0
t_first = 0.25
[initial]
kind = "radial_bump"
k = 1.0
a = 0.02
"#;

fn conemcf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conemcf")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.toml");
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn run_then_report_reproduces_the_audit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let out = dir.path().join("out");
    let o = conemcf(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("audit passed"));
    for f in ["timeseries.jsonl", "audit.json", "snapshot_0000.csv", "snapshot_0003.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }

    let again = dir.path().join("again");
    let o = conemcf(&["report", out.join("timeseries.jsonl").to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        std::fs::read(out.join("audit.json")).unwrap(),
        std::fs::read(again.join("audit.json")).unwrap()
    );
}

#[test]
fn overrides_apply() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let out = dir.path().join("out");
    let o = conemcf(&[
        "run", "--config", &cfg, "--out", out.to_str().unwrap(), "--t-end", "0.5", "--resolution", "8", "--axisymmetric",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let recs = read_timeseries(&out.join("timeseries.jsonl")).unwrap();
    assert_eq!(recs.last().unwrap().t, 0.5);
    let rows = std::fs::read_to_string(out.join("snapshot_0000.csv")).unwrap();
    // Header plus one row per radial node.
    assert_eq!(rows.lines().count(), 9);
}

#[test]
fn report_fails_on_a_violated_envelope() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let out = dir.path().join("out");
    assert_eq!(conemcf(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]).status.code(), Some(0));
    let mut recs = read_timeseries(&out.join("timeseries.jsonl")).unwrap();
    recs[2].f2m2nt_max += 0.1;
    let bad = dir.path().join("bad.jsonl");
    write_timeseries(&bad, &recs).unwrap();
    let o = conemcf(&["report", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn bad_config_is_an_error_listing_every_problem() {
    let dir = tempfile::tempdir().unwrap();
    let text = CONFIG.replace("rho = 0.5", "rho = 1.2").replace("t_end = 1.0", "t_end = -1.0");
    let cfg = write_config(dir.path(), &text);
    let o = conemcf(&["run", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("open unit ball"), "{err}");
    assert!(err.contains("t_end"), "{err}");

    let cfg = write_config(dir.path(), &CONFIG.replace("[mesh]", "[mesh]\nnrr = 3"));
    assert_eq!(conemcf(&["run", "--config", &cfg]).status.code(), Some(2));
}

#[test]
fn homothetic_trajectory_values() {
    let o = conemcf(&["homothetic", "--k", "1", "--n", "3", "--t-end", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,u"));
    let last: Vec<f64> = lines.last().unwrap().split(',').map(|s| s.parse().unwrap()).collect();
    assert_eq!(last, vec![1.0, 7f64.sqrt()]);
}

#[test]
fn verify_rejects_unknown_criteria() {
    assert_eq!(conemcf(&["verify", "11"]).status.code(), Some(2));
}
