use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_coherent-nse"));
    c.env_remove("COHERENT_NSE_OUT");
    c
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(c: &mut Command) -> Output {
    let out = c.output().unwrap();
    if !matches!(out.status.code(), Some(0 | 1)) {
        panic!("{}", String::from_utf8_lossy(&out.stderr));
    }
    out
}

const SMALL_LINEAR: [&str; 10] = [
    "--set",
    "lattice.resolution=8",
    "--set",
    "solver.dt=0.01",
    "--set",
    "solver.t_end=60.0",
    "--set",
    "solver.samples=80",
    "--set",
    "experiment.fit_window=[10.0, 60.0]",
];

fn strip_timing(mut v: serde_json::Value) -> serde_json::Value {
    v.as_object_mut().unwrap().remove("elapsed_seconds");
    v
}

#[test]
fn selftest_passes_and_detects_an_injected_fault() {
    let clean = run(bin().arg("selftest"));
    assert!(clean.status.success());
    let report: serde_json::Value = serde_json::from_slice(&clean.stdout).unwrap();
    assert!(report["results"].as_array().unwrap().iter().all(|r| r["passed"] == true));

    let faulty = run(bin().args(["selftest", "--fault", "resolvent-sign"]));
    assert_eq!(faulty.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&faulty.stdout).unwrap();
    let failed: Vec<&str> = report["results"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["passed"] == false)
        .map(|r| r["name"].as_str().unwrap())
        .collect();
    assert_eq!(failed, ["resolvent-expansion-identities"]);
}

#[test]
fn verify_writes_a_reproducible_report() {
    let dir = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    for sub in ["a", "b"] {
        let out = dir.path().join(sub);
        let status = run(bin().arg("--out").arg(&out).arg("verify").arg(config("linear-power.toml")).args(SMALL_LINEAR));
        assert!(status.status.success());
        for ext in ["csv", "txt", "json"] {
            assert!(out.join(format!("linear-power.{ext}")).is_file());
        }
        let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("linear-power.json")).unwrap()).unwrap();
        reports.push(strip_timing(json));
        assert_eq!(std::fs::read(out.join("linear-power.csv")).unwrap(), std::fs::read(dir.path().join("a/linear-power.csv")).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
    // started on the expansion, so the residual vanishes at t_start
    assert_eq!(reports[0]["initial_mismatch"], 0.0);
    assert_eq!(reports[0]["residuals"][0][0], 0.0);
}

#[test]
fn output_directory_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(bin().env("COHERENT_NSE_OUT", dir.path()).arg("expand").arg(config("nse-power.toml")).args(["--set", "lattice.resolution=8"]));
    assert!(out.status.success());
    for n in 1..=3 {
        assert!(dir.path().join(format!("nse-power.q{n}.exp")).is_file());
    }
}

#[test]
fn expand_can_store_coefficients_separately() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(bin().arg("--out").arg(dir.path()).args(["expand", "--separate"]).arg(config("nse-log.toml")).args(["--set", "lattice.resolution=8"]));
    assert!(out.status.success());
    let files = std::fs::read_dir(dir.path()).unwrap().count();
    assert!(files > 2, "only {files} files");
}

#[test]
fn lemma_table_from_the_command_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(bin().arg("--out").arg(dir.path()).args(["lemma-integral", "--case", "0,1,1,1", "--case", "1,2,0.5,2.718281828459045", "--t-max", "500"]));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let csv = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().path()).find(|p| p.extension().is_some_and(|e| e == "csv")).unwrap();
    let text = std::fs::read_to_string(csv).unwrap();
    assert!(text.starts_with("m,lambda,gamma,t_star,t,integral,ratio"));
}

#[test]
fn malformed_input_exits_with_code_two() {
    let out = bin().args(["verify", "/nonexistent.toml"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().arg("verify").arg(config("linear-power.toml")).args(["--set", "solver.dt=0.3"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["lemma-integral", "--case", "1,2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
