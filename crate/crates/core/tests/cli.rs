use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_arith-euler"));
    cmd.env_remove("ARITH_EULER_OUT_DIR");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn construct(dir: &Path, args: &[&str]) -> PathBuf {
    let mut all = vec!["construct", "--out", dir.to_str().unwrap()];
    all.extend_from_slice(args);
    let o = run(&all);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    PathBuf::from(stdout(&o).trim())
}

#[test]
fn construct_then_verify() {
    let dir = TempDir::new().unwrap();
    let file = construct(dir.path(), &["--prime", "5", "--precision", "2"]);
    assert_eq!(file, dir.path().join("flow_p5_N2.json"));
    let text = std::fs::read_to_string(&file).unwrap();
    assert!(text.contains("\"schema\": \"arith-euler/flow/v1\""));

    let o = run(&["verify", file.to_str().unwrap(), "--trials", "5"]);
    let out = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{out}");
    assert!(out.contains("PASS prime_integrals"));
    assert!(out.contains("PASS linearization c="));
    assert!(out.contains(" 0 failed"));
}

#[test]
fn out_dir_from_environment() {
    let dir = TempDir::new().unwrap();
    let o = bin()
        .args(["construct", "--prime", "3", "--precision", "2"])
        .env("ARITH_EULER_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("flow_p3_N2.json").exists());
}

#[test]
fn tampered_flow_fails_with_difference() {
    let dir = TempDir::new().unwrap();
    let file = construct(dir.path(), &["--prime", "5", "--precision", "2"]);
    let mut json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    let flow = json["flow"].as_object_mut().unwrap();
    flow.remove("phi1");
    flow.remove("phi2");
    // Move one coefficient of Phi_2^2 by p; H2 picks this up with weight 1.
    let term = &mut flow["phi2_sq"]["numerator"]["terms"][0][1];
    let c: u64 = term.as_str().unwrap().parse().unwrap();
    *term = serde_json::Value::String(((c + 5) % 25).to_string());
    let tampered = dir.path().join("tampered.json");
    std::fs::write(&tampered, serde_json::to_string(&json).unwrap()).unwrap();

    let o = run(&["verify", tampered.to_str().unwrap(), "--trials", "2"]);
    let out = stdout(&o);
    assert_eq!(o.status.code(), Some(1), "{out}");
    assert!(out.contains("FAIL prime_integrals"));
    assert!(out.contains("cleared difference: "));
    assert!(out.contains("H2: 5*"), "{out}");
}

#[test]
fn malformed_flow_file() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("junk.json");
    std::fs::write(&path, "{\"schema\": \"other\"}").unwrap();
    let o = run(&["verify", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error: malformed input"));
}

#[test]
fn hasse_p3() {
    let o = run(&["hasse", "--prime", "3", "--trials", "50"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["invariant"]["degree"], 1);
    assert_eq!(v["point_counts"]["cubics_passed"], 50);
    assert_eq!(v["point_counts"]["quartics_passed"], 50);
}

#[test]
fn hasse_p7_other_coefficients() {
    let o = run(&["hasse", "--prime", "7", "--a", "1,2,4", "--trials", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["invariant"]["degree"], 3);
    assert_eq!(v["invariant"]["homogeneous"], true);
    assert_eq!(v["invariant"]["nonzero_mod_p"], true);
}

#[test]
fn hasse_zero_trials() {
    let o = run(&["hasse", "--trials", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["point_counts"]["trials"], 0);
    assert_eq!(v["point_counts"]["failures"].as_array().unwrap().len(), 0);
}

#[test]
fn composite_prime_rejected() {
    let o = run(&["construct", "--prime", "4"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr(&o).trim(), "error: 4 is not prime");
}

#[test]
fn repeated_coefficients_rejected() {
    let o = run(&["hasse", "--a", "0,0,1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("not distinct"));
}

#[test]
fn p3_verify_skips_linearization() {
    let dir = TempDir::new().unwrap();
    let file = construct(dir.path(), &["--prime", "3", "--precision", "2"]);
    let o = run(&["verify", file.to_str().unwrap(), "--trials", "5"]);
    let out = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{out}");
    assert!(out.contains("SKIP linearization: skipped: no admissible level sets over F_3"));
    assert!(out.contains("PASS prime_integrals"));
}

#[test]
fn reports_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let file = construct(dir.path(), &["--prime", "5", "--precision", "2"]);
    let reports: Vec<Vec<u8>> = (0..2)
        .map(|i| {
            let path = dir.path().join(format!("report{i}.json"));
            let o = run(&[
                "verify",
                file.to_str().unwrap(),
                "--seed",
                "9",
                "--trials",
                "5",
                "--report",
                path.to_str().unwrap(),
            ]);
            assert_eq!(o.status.code(), Some(0));
            std::fs::read(path).unwrap()
        })
        .collect();
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn demo_zero_steps_writes_header_only() {
    let dir = TempDir::new().unwrap();
    let o = run(&["demo", "--steps", "0", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert_eq!(csv, "t,x1,x2,x3,H1,H2\n");
}

#[test]
fn demo_conserves() {
    let dir = TempDir::new().unwrap();
    let o = run(&[
        "demo",
        "--a",
        "1,2,3",
        "--x0",
        "1,1,1",
        "--steps",
        "2000",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2002);
    assert!(stdout(&o).contains("max drift"));
}

#[test]
fn demo_rejects_bad_step() {
    let o = run(&["demo", "--dt", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn construction_log_records_delta_degree() {
    let dir = TempDir::new().unwrap();
    let file = construct(dir.path(), &["--prime", "5", "--precision", "3", "--a", "0,1,2"]);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(file).unwrap()).unwrap();
    assert_eq!(v["construction"]["delta3_degree"], 9);
    assert!(v["manifest"].as_array().unwrap().iter().all(|m| m["passed"] == true));
}

#[test]
fn precision_one_rejected() {
    let o = run(&["construct", "--precision", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("precision at least 2"));
}
