use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn coposcope(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coposcope")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

const PARACHUTE: [&str; 10] = ["--graph", "parachute", "--masses", "1", "--M", "0,0,1,1", "--t", "1", "--s", ""];

fn parachute_at(s: &str) -> Vec<&str> {
    let mut v = PARACHUTE.to_vec();
    v[9] = s;
    v
}

#[test]
fn symanzik_counts_and_bubble_text() {
    let out = coposcope(&["symanzik", "--graph", "g1", "--counts"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("F: 63 monomials"));
    let out = coposcope(&["symanzik", "--graph", "bubble"]);
    assert!(stdout(&out).contains("U = x1 + x2"));
    let out = coposcope(&["symanzik", "--graph", "parachute", "--support"]);
    assert_eq!(stdout(&out).lines().count(), 14);
}

#[test]
fn polytope_reports_the_f_vector() {
    let out = coposcope(&["polytope", "--graph", "g3"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["f_vector"], serde_json::json!([28, 84, 115, 90, 41, 10]));
}

#[test]
fn decide_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("cert.json");
    let cert_s = cert.to_string_lossy().into_owned();

    let mut args = vec!["--output", cert_s.as_str(), "decide"];
    args.extend(parachute_at("39/10"));
    let out = coposcope(&args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&cert).unwrap()).unwrap();
    assert_eq!(v["verdict"], "copositive_interior");
    assert_eq!(v["polya"]["N"], 37);

    let mut args = vec!["verify", "--certificate", cert_s.as_str()];
    args.extend(parachute_at("39/10"));
    let out = coposcope(&args);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("PASS"));

    let mut args = vec!["verify", "--certificate", cert_s.as_str()];
    args.extend(parachute_at("4"));
    let out = coposcope(&args);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).starts_with("FAIL"));
}

#[test]
fn not_copositive_exit_code_and_witness() {
    let mut args = vec!["decide"];
    args.extend(parachute_at("41/10"));
    let out = coposcope(&args);
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["verdict"], "not_copositive");
    assert_eq!(v["witness"]["value"], "-41/400");

    let mut args = vec!["witness", "--point", "1.05,1,1,1", "--face-normal", "0,0,1,2"];
    args.extend(parachute_at("41/10"));
    let out = coposcope(&args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("-41/400"));
}

#[test]
fn batch_jobs_print_json_lines() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.json", r#"{"graph": "bubble", "kinematics": {"fourleg": {"m": ["1"], "M": ["0"], "s": "3", "t": "0"}}}"#);
    let b = write(
        dir.path(),
        "b.json",
        r#"{"graph": {"edges": [[1,2],[1,2]], "nodes": [1,1,2,2]},
            "kinematics": {"masses": ["1", "1"], "K": [["5","0","-5","0"],["0","0","0","0"],["-5","0","5","0"],["0","0","0","0"]]}}"#,
    );
    let out = coposcope(&["--jobs", "2", "decide", &a, &b]);
    let lines: Vec<serde_json::Value> =
        stdout(&out).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0]["certificate"]["verdict"], "copositive_interior");
    assert_eq!(lines[1]["certificate"]["verdict"], "not_copositive");
    assert!(lines[1]["job"].as_str().unwrap().ends_with("b.json"));
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn oracles_and_realization() {
    let out = coposcope(&["oracle", "banana", "--m", "1,1,1", "--s", "9"]);
    assert!(stdout(&out).contains("true (boundary: discriminant 0)"));
    let out = coposcope(&["oracle", "bubble", "--m1", "1", "--m2", "1", "--s", "9/2"]);
    assert!(stdout(&out).starts_with("false"));
    let out = coposcope(&["oracle", "triangle", "--matrix", "1,-1/2,-1/2;-1/2,1,-1/2;-1/2,-1/2,1"]);
    assert!(stdout(&out).starts_with("true"));

    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "h.json", "[[1,-1,1,1,-1],[-1,1,-1,1,1],[1,-1,1,-1,1],[1,1,-1,1,-1],[-1,1,1,-1,1]]");
    let out = coposcope(&["realize", &m]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["masses"], serde_json::json!(["1", "1", "1", "1", "1"]));
    assert_eq!(v["K"][0], serde_json::json!(["4", "-4", "2", "2", "-4"]));
}

#[test]
fn bad_input_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", "{\"graph\": \"bubble\",\n  oops}");
    let out = coposcope(&["decide", "--job", &bad]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.json:2:"), "{err}");
    let out = coposcope(&["symanzik", "--graph", "no_such_graph"]);
    assert_eq!(out.status.code(), Some(3));
}
