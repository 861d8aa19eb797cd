use std::path::Path;
use std::process::Command;

fn scenario(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data/scenarios")
        .join(format!("{name}.toml"))
        .display()
        .to_string()
}

fn faircurtail(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_faircurtail")).args(args).output().unwrap()
}

#[test]
fn run_writes_every_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let sc = scenario("cigre_lv");
    let o = faircurtail(&["run", "--scenario", &sc, "--variant", "F1P0", "--days", "1", "--out", out, "--dump-lp"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["timeseries.csv", "voltages.csv", "metrics.csv", "report.json"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    let metrics = std::fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
    assert!(metrics.starts_with("day,variant,w,curtail_pct,jfi,gini\n1,F1P0,"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["variant"], "F1P0");
    assert_eq!(std::fs::read_dir(dir.path().join("debug")).unwrap().count(), 96);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    let out = dir.path().join("o");
    std::fs::write(
        &cfg,
        format!("scenario = {:?}\nvariant = \"F0P0\"\nw = 0.1\ndays = 1\nweights = [0.0, 0.1]\n", scenario("cigre_lv")),
    )
    .unwrap();
    let o = faircurtail(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--variants",
        "F0P1",
        "--objective",
        "bill",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let metrics = std::fs::read_to_string(out.join("metrics.csv")).unwrap();
    let rows: Vec<&str> = metrics.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.contains(",F0P1,")));
}

#[test]
fn bad_input_exits_nonzero() {
    let o = faircurtail(&["run", "--days", "1"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
    let o = faircurtail(&["run", "--variant", "F2P2"]);
    assert!(!o.status.success());
    let o = faircurtail(&["sweep", "--scenario", &scenario("case33")]);
    assert!(!o.status.success());
}

#[test]
fn shipped_config_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/run_case69.toml");
    let o = faircurtail(&["run", "--config", cfg.to_str().unwrap(), "--days", "1", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    assert!(report.contains("\"F1P1\""));
}
