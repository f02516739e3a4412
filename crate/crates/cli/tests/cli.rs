use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_succmin"))
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("succmin-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

const CROSS_5: &str = r#"{"kind":"cross","scales":["1/5","1"]}"#;

fn cross_case() -> PathBuf {
    scratch("r3.json", r#"{"basis":[["1","0"],["0","1"]],"alpha":["1/5","0"],"Q":4}"#)
}

fn cube_example() -> PathBuf {
    scratch("c.json", r#"{"basis":[["1","0"],["0","1"]],"alpha":["3/7","2/7"],"Q":3}"#)
}

#[test]
fn verify_cross_polytope_lower_equality() {
    let p = cross_case();
    let out = run(&["verify", "-i", p.to_str().unwrap(), "--body", CROSS_5, "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json_of(&out);
    let lower = doc["result"].as_array().unwrap().iter().find(|r| r["check_id"] == "thm_ii_lower").unwrap().clone();
    assert_eq!(lower["verdict"]["status"], "holds");
    assert_eq!(lower["equality"], true);
    assert_eq!(lower["lhs"]["lo"], "2/5");
    assert_eq!(lower["rhs"]["hi"], "2/5");
}

#[test]
fn dirichlet_example() {
    let out = run(&["dirichlet", "--alpha", "2/3,1/2", "--Q", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("q = 2"));
    assert!(text.contains("z = (1,1)"));
    assert!(text.contains("1/3 < 1/2"), "{text}");
}

#[test]
fn decimal_alpha_is_exact() {
    let out = run(&["dirichlet", "--alpha", "0.7", "--Q", "3", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json_of(&out);
    assert_eq!(doc["result"]["approximation"]["q"], 3);
    assert_eq!(doc["result"]["approximation"]["max_residual"], "1/10");
}

#[test]
fn gamma_cap_is_exit_three() {
    let p = scratch("n3.json", r#"{"basis":[["1","0","0"],["0","1","0"],["0","0","1"]],"alpha":["1/97","5/97","11/97"],"Q":90}"#);
    let out = run(&["gamma", "-i", p.to_str().unwrap(), "--node-cap", "2", "--format", "json"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json_of(&out)["result"]["status"], "skipped_cap_exceeded");
}

#[test]
fn gamma_value_and_round_trip() {
    let p = cube_example();
    let out = run(&["gamma", "-i", p.to_str().unwrap(), "--format", "json", "--no-timestamp"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json_of(&out);
    assert_eq!(doc["result"]["value"], "1/7");
    let back: succmin::periodic::GammaResult = serde_json::from_value(doc["result"].clone()).unwrap();
    assert_eq!(serde_json::to_value(&back).unwrap(), doc["result"]);
}

#[test]
fn report_json_round_trips() {
    let p = cube_example();
    let out = run(&["verify", "-i", p.to_str().unwrap(), "--body", "ball", "--format", "json"]);
    let doc = json_of(&out);
    let reports: Vec<succmin::verify::InequalityReport> = serde_json::from_value(doc["result"].clone()).unwrap();
    assert_eq!(reports.len(), 15);
    assert_eq!(serde_json::to_value(&reports).unwrap(), doc["result"]);
    for cmd in ["minima", "minima-tilde"] {
        let out = run(&[cmd, "-i", p.to_str().unwrap(), "--body", "ball", "--format", "json"]);
        let doc = json_of(&out);
        let m: succmin::periodic::MinimaResult = serde_json::from_value(doc["result"].clone()).unwrap();
        assert_eq!(serde_json::to_value(&m).unwrap(), doc["result"]);
    }
}

#[test]
fn output_is_deterministic_without_timestamp() {
    let p = cube_example();
    let q = cross_case();
    let args = ["verify", "-i", p.to_str().unwrap(), q.to_str().unwrap(), "--format", "json", "--no-timestamp"];
    let a = run(&args);
    let b = run(&[&args[..], &["--workers", "2"]].concat());
    assert_eq!(a.stdout, b.stdout);
    let s1 = run(&["sharpness", "--trials", "300", "--format", "json", "--no-timestamp"]);
    let s2 = run(&["sharpness", "--trials", "300", "--workers", "3", "--format", "json", "--no-timestamp"]);
    assert_eq!(s1.status.code(), Some(0));
    assert_eq!(s1.stdout, s2.stdout);
    let with_time = json_of(&run(&["random", "--seed", "5", "--format", "json"]));
    assert!(with_time["meta"]["timestamp_unix"].is_u64());
}

#[test]
fn malformed_json_reports_location() {
    let p = scratch("bad.json", "{\"basis\": [[\"1\",\"0\"],\n [\"0\",\"1\"]], \"alpha\": [\"1/2\", }");
    let out = run(&["minima", "-i", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn invalid_inputs_are_exit_two() {
    let p = cube_example();
    let out = run(&["minima", "-i", p.to_str().unwrap(), "--body", r#"{"kind":"pyramid"}"#]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["minima", "-i", p.to_str().unwrap(), "--body", "ball", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let hit = scratch("hit.json", r#"{"basis":[["1","0"],["0","1"]],"alpha":["1/2","0"],"Q":3}"#);
    let out = run(&["beta", "-i", hit.to_str().unwrap(), "--format", "json"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json_of(&out)["error"]["kind"], "assumption_violated");
    let out = run(&["blichfeldt", "-i", p.to_str().unwrap(), "--lo", "0,0", "--hi", "1/2,1/2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn blichfeldt_and_random() {
    let p = cube_example();
    let out = run(&["blichfeldt", "-i", p.to_str().unwrap(), "--lo", "0,0", "--hi", "3/5,1/2", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["result"]["mode"], "exact");
    let a = run(&["random", "--seed", "11", "--n", "3"]);
    let b = run(&["random", "--seed", "11", "--n", "3"]);
    assert_eq!(a.stdout, b.stdout);
    let spec: succmin::periodic::InstanceSpec = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(spec.alpha.len(), 3);
}

#[test]
fn stdin_instance() {
    use std::io::Write;
    let mut child = bin()
        .args(["beta", "-i", "-", "--format", "json"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(br#"{"basis":[["1","0"],["0","1"]],"alpha":["3/7","2/7"],"Q":3}"#)
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(json_of(&out)["result"]["value"]["plain"], "2/7");
}

#[test]
fn selftest_passes() {
    let out = run(&["selftest", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json_of(&out)["result"].as_array().unwrap().iter().all(|f| f["passed"] == true));
}
