use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_gtl-lab"));
    c.env_remove("GTL_LAB_SEED");
    c
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn eigenvalues(o: &Output) -> Vec<f64> {
    let v: serde_json::Value = serde_json::from_str(&stdout(o)).unwrap();
    v["eigenvalues"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

#[test]
fn spectrum_examples() {
    let o = run(&["spectrum", "--state", fixture("n3_sqrt2.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let e = eigenvalues(&o);
    let want = [-2f64.sqrt(), 0.0, 2f64.sqrt()];
    assert!(e.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-6), "{e:?}");

    let o = run(&["spectrum", "--state", fixture("n3_diagonal.json").to_str().unwrap()]);
    let e = eigenvalues(&o);
    assert!(e.iter().zip([1.0, 2.0, 3.0]).all(|(a, b)| (a - b).abs() < 1e-12), "{e:?}");
}

#[test]
fn malformed_state_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", "{\"kind\": \"n3\", ");
    let o = run(&["spectrum", "--state", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("malformed"));
}

#[test]
fn check_list_errors_exit_two() {
    assert_eq!(run(&["check", "--check", ""]).status.code(), Some(2));
    assert_eq!(run(&["check", "--check", "nonsense"]).status.code(), Some(2));
    assert_eq!(run(&["simulate"]).status.code(), Some(2));
}

#[test]
fn rmatrix_check_is_measured_and_deterministic() {
    let a = run(&["check", "--check", "rmatrix"]);
    let b = run(&["check", "--check", "rmatrix"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    let checks = v["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|c| c["status"] == "measured"));
    assert!(!v["errata"].as_array().unwrap().is_empty());
}

#[test]
fn seed_environment_overrides_flag() {
    let o = bin().args(["--seed", "5", "check", "--check", "oracle"]).env("GTL_LAB_SEED", "11").output().unwrap();
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["seed"], 11);
    let o = run(&["--seed", "5", "check", "--check", "oracle"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["seed"], 5);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn asserted_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let o = run(&["check", "--check", "isospectral", "--out", report.to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let any_fail = v["checks"].as_array().unwrap().iter().any(|c| c["status"] == "fail");
    assert_eq!(o.status.code(), Some(if any_fail { 1 } else { 0 }));
}

#[test]
fn simulate_n3_reports_small_h2_drift_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let state = fixture("n3_soliton.json");
    let mut outputs = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("run{k}"));
        let o = run(&[
            "simulate", "--flow", "n3", "--state", state.to_str().unwrap(), "--t-end", "10", "--rk45", "--atol", "1e-10",
            "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push((
            std::fs::read(out.join("trajectory.csv")).unwrap(),
            std::fs::read(out.join("stats.json")).unwrap(),
            stdout(&o),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
    let stats: serde_json::Value = serde_json::from_slice(&outputs[0].1).unwrap();
    let h2 = stats["drift"].as_array().unwrap().iter().find(|d| d[0] == "H2").unwrap()[1].as_f64().unwrap();
    assert!(h2 <= 1e-8, "{h2}");
    assert!(outputs[0].2.contains("max drift H2"));
    let header = String::from_utf8_lossy(&outputs[0].0).lines().next().unwrap().to_string();
    assert_eq!(header, "t,p1,p2,p3,a1,a2,u,H1,H2,H3,C1,C2,C3,lam1,lam2,lam3");
}

#[test]
fn fixed_point_gives_constant_rows() {
    let dir = tempfile::tempdir().unwrap();
    let state = write(dir.path(), "rest.json", r#"{"kind":"n3","p":[1,2,3],"a":[0,0],"u":0}"#);
    let out = dir.path().join("out");
    let o = run(&["simulate", "--flow", "n3", "--state", state.to_str().unwrap(), "--dt", "0.1", "--t-end", "1", "--out", out.to_str().unwrap(), "--max-drift", "0"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').skip(1).collect()).collect();
    assert_eq!(rows.len(), 11);
    assert!(rows.iter().all(|r| r == &rows[0]));
}

#[test]
fn drift_bound_violation_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "simulate", "--flow", "n3", "--state", fixture("n3_soliton.json").to_str().unwrap(), "--dt", "0.5", "--t-end", "5",
        "--max-drift", "1e-14", "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn flow_state_mismatch_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["simulate", "--flow", "gtl", "--state", fixture("n3_soliton.json").to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["simulate", "--flow", "warp", "--state", fixture("n3_soliton.json").to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn gtl_as_printed_emits_discrepancy_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "simulate", "--flow", "gtl", "--state", fixture("gtl_n1.json").to_str().unwrap(), "--as-printed", "--t-end", "0.5",
        "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let table = std::fs::read_to_string(dir.path().join("trajectory.printed_discrepancy.csv")).unwrap();
    assert!(table.starts_with("field,printed,oracle,difference\n"));
    let u_row = table.lines().find(|l| l.starts_with("u,")).unwrap();
    let diff: f64 = u_row.rsplit(',').next().unwrap().parse().unwrap();
    assert!(diff.abs() > 1e-3, "{u_row}");
    assert!(stdout(&o).contains("printed vs oracle"));
}

#[test]
fn sweep_writes_one_pair_per_input() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "first.json", r#"{"kind":"n3","p":[0,0,0],"a":[1,1],"u":0.5}"#);
    let b = write(dir.path(), "second.json", r#"{"kind":"n3","p":[0.2,0,-0.1],"a":[0.5,0.7],"u":0.2}"#);
    let out = dir.path().join("out");
    let o = run(&["simulate", "--flow", "n3", "--sweep", a.to_str().unwrap(), b.to_str().unwrap(), "--t-end", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for stem in ["first", "second"] {
        assert!(out.join(format!("{stem}.csv")).exists());
        assert!(out.join(format!("{stem}.stats.json")).exists());
    }
}

#[test]
fn tau_check_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let one = "[1,0,0,0,0,0,0,0]";
    let std_doc = write(dir.path(), "vac.json", &format!(r#"{{"kind":"toda","prev":{one},"tau":{one},"next":{one},"variant":"standard"}}"#));
    let o = run(&["tau-check", "--input", std_doc.to_str().unwrap(), "--tol", "1e-14"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = stdout(&o);
    assert!(csv.starts_with("line,k,residual\n"));
    assert_eq!(csv.lines().count(), 1 + 6);

    let printed = write(dir.path(), "vacp.json", &format!(r#"{{"kind":"toda","prev":{one},"tau":{one},"next":{one}}}"#));
    assert_eq!(run(&["tau-check", "--input", printed.to_str().unwrap(), "--tol", "1e-14"]).status.code(), Some(1));

    let bad = write(dir.path(), "bad.json", r#"{"kind":"toda","prev":[1]}"#);
    assert_eq!(run(&["tau-check", "--input", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn errata_table_and_json() {
    let o = run(&["errata"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for name in ["gtl.u_dot_index", "n3.bracket_a1a2_coefficient", "n3.casimir_c2_p2_coefficient", "pq.flow_inconsistency"] {
        assert!(text.contains(name), "{name}");
    }
    let o = run(&["errata", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 10);
}
