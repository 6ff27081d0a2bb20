use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use grasslin::dense::{Matrix, Scalar, Vector};
use grasslin::io::{parse_matrix_file, parse_scalar, parse_vector_file};
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_grasslin"));
    c.env_remove("GRASSLIN_GUARD");
    c
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut full = args.to_vec();
    full.extend(["--format", "json"]);
    let o = run(&full);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).expect("valid JSON")
}

fn scalar(v: &Value) -> Scalar {
    match v {
        Value::Number(n) => Scalar::new(n.as_f64().unwrap(), 0.0),
        Value::String(s) => parse_scalar(s).unwrap(),
        other => panic!("not a scalar: {other}"),
    }
}

fn vector(v: &Value) -> Vector {
    Vector::from_vec(v.as_array().unwrap().iter().map(scalar).collect())
}

fn tmp_file(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("grasslin-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn rank_of_identity() {
    let i3 = tmp_file("i3.txt", "1 0 0\n0 1 0\n0 0 1\n");
    let o = run(&["rank", "--matrix", s(&i3), "--theta", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().next(), Some("rank 3"));
}

#[test]
fn bezout_solve_report() {
    let (a, b) = (fixture("bezout_A.mtx"), fixture("bezout_b.vec"));
    let doc = json(&["solve", "--matrix", s(&a), "--rhs", s(&b), "--theta", "5e-4"]);
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["rank"], 7);
    assert_eq!(doc["dimension"], 2);
    let sens = doc["sensitivity"].as_f64().unwrap();
    assert!((sens - 17.19).abs() < 0.01, "{sens}");
    assert_eq!(doc["kernel"].as_array().unwrap().len(), 2);
}

fn residual_of(a: &Matrix, b: &Vector, doc: &Value) -> f64 {
    let anchor = vector(&doc["anchor"]);
    let mut r = a.mul_vec(&anchor).sub(b).norm();
    for col in doc["kernel"].as_array().unwrap() {
        r = r.max(a.mul_vec(&vector(col)).norm());
    }
    r
}

#[test]
fn json_round_trip_reproduces_residual() {
    for (name, theta) in [("bezout", "5e-4"), ("regulator", "1e-10"), ("division", "3.18e-6"), ("sylvester", "1e-3")] {
        let (pa, pb) = (fixture(&format!("{name}_A.mtx")), fixture(&format!("{name}_b.vec")));
        let doc = json(&["solve", "--matrix", s(&pa), "--rhs", s(&pb), "--theta", theta]);
        let a = parse_matrix_file(&pa).unwrap();
        let b = parse_vector_file(&pb).unwrap();
        let reported = doc["residual"].as_f64().unwrap();
        let recomputed = residual_of(&a, &b, &doc);
        assert!((reported - recomputed).abs() <= 1e-12, "{name}: {reported} vs {recomputed}");
    }
}

#[test]
fn complex_input_round_trips() {
    let a = tmp_file("c.txt", "1+2i 0\n0 1\n");
    let b = tmp_file("cb.txt", "1-1i\n2\n");
    let doc = json(&["solve", "--matrix", s(&a), "--rhs", s(&b), "--theta", "1e-8"]);
    let x = vector(&doc["anchor"]);
    let expect = Scalar::new(1.0, -1.0) / Scalar::new(1.0, 2.0);
    assert_eq!(x[0], expect);
    assert_eq!(x[1], Scalar::new(2.0, 0.0));
}

#[test]
fn division_demo_table() {
    let doc = json(&["demo", "division"]);
    let rows = doc["checks"]["particular_solutions"].as_array().unwrap();
    let computed: Vec<&Value> = rows
        .iter()
        .filter(|r| ["dense_solve", "tikhonov", "truncated_svd"].contains(&r["solution"].as_str().unwrap()))
        .collect();
    assert_eq!(computed.len(), 3);
    for r in computed {
        assert!(r["nearest_point_error"].as_f64().unwrap() <= 8.28e-7);
        assert_eq!(r["within_bound"], true);
    }
}

#[test]
fn every_demo_runs() {
    for case in ["sylvester", "bezout", "division", "regulator", "macaulay", "volterra"] {
        let doc = json(&["demo", case]);
        assert_eq!(doc["case"], case);
    }
}

#[test]
fn exit_codes() {
    // usage
    assert_eq!(run(&[]).status.code(), Some(2));
    assert_eq!(run(&["rank"]).status.code(), Some(2));
    assert_eq!(run(&["rank", "--matrix", "x", "--theta", "abc"]).status.code(), Some(2));
    assert_eq!(run(&["demo", "nonexistent"]).status.code(), Some(2));
    // input
    let bad = tmp_file("bad.txt", "1 2\n3\n");
    let o = run(&["rank", "--matrix", s(&bad), "--theta", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("InconsistentRowLength"));
    let garbage = tmp_file("garbage.txt", "1 2\n3 x\n");
    let o = run(&["rank", "--matrix", s(&garbage), "--theta", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr).to_string();
    assert!(err.contains("ParseError") && err.contains("line 2, column 3"), "{err}");
    // numerical
    let d = tmp_file("d.txt", "1 0\n0 0.5\n");
    let o = run(&["rank", "--matrix", s(&d), "--theta", "0.5"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ThetaOnSingularValue"));
    // help
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn guard_override_from_environment() {
    let d = tmp_file("g.txt", "1 0\n0 0.5\n");
    let near = ["rank", "--matrix", s(&d), "--theta", "0.50001"];
    assert_eq!(run(&near).status.code(), Some(0));
    let o = bin().args(near).env("GRASSLIN_GUARD", "1e-3").output().unwrap();
    assert_eq!(o.status.code(), Some(3));
    let o = bin().args(near).env("GRASSLIN_GUARD", "lots").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bound_check_is_seed_reproducible() {
    let args = ["bound", "check", "--suite", "wedin_kernel_bound", "--trials", "20", "--seed", "7", "--format", "json"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let doc: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(doc["passed"], true);
}

#[test]
fn bound_window_and_evaluation() {
    let data = tmp_file("w.txt", "1 0\n0 1e-7\n");
    let doc = json(&["bound", "window", "--matrix", s(&data), "--beta", "1e-6", "--theta", "1e-5"]);
    assert_eq!(doc["window"]["rank"], 1);
    assert_eq!(doc["window"]["contains_theta"], true);

    let reference = tmp_file("ref.txt", "1 0\n0 0\n");
    let doc = json(&["bound", "wedin_kernel_bound", "--matrix", s(&reference), "--matrix2", s(&data)]);
    assert_eq!(doc["hypotheses_met"], true);
    assert!(doc["value"].as_f64().unwrap() >= 0.0);
}

#[test]
fn solve_against_reference_reports_bounds() {
    let reference = tmp_file("sref.txt", "2 0\n0 0\n");
    let data = tmp_file("sdat.txt", "2 0\n0 1e-9\n");
    let b = tmp_file("sb.txt", "2\n0\n");
    let doc = json(&[
        "solve", "--matrix", s(&data), "--rhs", s(&b), "--theta", "1e-4", "--matrix2", s(&reference),
    ]);
    let bounds = &doc["bounds"];
    assert_eq!(bounds["reference_rank"], 1);
    let actual = bounds["actual_distance"].as_f64().unwrap();
    let tsvd = bounds["evaluations"]["tsvd_perturbation_bound"]["value"].as_f64().unwrap();
    assert!(actual <= tsvd);
}

#[test]
fn distances() {
    let a = tmp_file("da.txt", "1 0\n0 0\n");
    let b = tmp_file("db.txt", "0 0\n0 1\n");
    let doc = json(&["dist", "--matrix", s(&a), "--matrix2", s(&b)]);
    assert_eq!(doc["kind"], "exact_kernel");
    assert!((doc["distance"].as_f64().unwrap() - 1.0).abs() < 1e-15);
    let r = tmp_file("dr.txt", "1\n0\n");
    let doc = json(&["dist", "--matrix", s(&a), "--rhs", s(&r), "--matrix2", s(&a), "--rhs2", s(&r), "--theta", "0.5"]);
    assert_eq!(doc["distance"].as_f64().unwrap(), 0.0);
}

#[test]
fn demo_export_writes_readable_files() {
    let dir = std::env::temp_dir().join(format!("grasslin-export-{}", std::process::id()));
    let o = run(&["demo", "macaulay", "--export", s(&dir)]);
    assert_eq!(o.status.code(), Some(0));
    let a = parse_matrix_file(dir.join("macaulay_A.mtx")).unwrap();
    assert_eq!(a, parse_matrix_file(fixture("macaulay_A.mtx")).unwrap());
}
