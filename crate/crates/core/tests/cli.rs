use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hypergeo::oracles::{jacobi_phi_first, JacobiParams};
use hypergeo::Complex64;
use jsonschema::JSONSchema;
use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_hypergeo"));
    cmd.env("HYPERGEO_THREADS", "2");
    cmd
}

fn exec(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

/// In-process run, returns (code, stdout, stderr).
fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("hypergeo").chain(args.iter().copied());
    let code = hypergeo::cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn schema(name: &str) -> JSONSchema {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{name}.schema.json"));
    let text = fs::read_to_string(&path).unwrap();
    JSONSchema::compile(&serde_json::from_str(&text).unwrap()).expect("schema compiles")
}

fn assert_valid(name: &str, text: &str) -> Value {
    let value: Value = serde_json::from_str(text).unwrap_or_else(|e| panic!("{name}: {e}\n{text}"));
    let compiled = schema(name);
    if let Err(errors) = compiled.validate(&value) {
        let list: Vec<String> = errors.map(|e| format!("{} at {}", e, e.instance_path)).collect();
        panic!("{name} output violates its schema: {list:?}\n{text}");
    }
    value
}

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        let ws = Self { dir: tempfile::tempdir().unwrap() };
        ws.write("a1.json", r#"{"family":"A","rank":1,"multiplicities":{"short":1.0}}"#);
        ws.write("bc1.json", r#"{"family":"BC","rank":1,"multiplicities":{"short":1.5,"double":0.5}}"#);
        ws.write("a2.json", r#"{"family":"A","rank":2,"multiplicities":{"short":1.0}}"#);
        ws.write("spectral.json", r#"{"spectral_radius": 6.0}"#);
        let mut rows = String::from("t,re,im\n");
        for k in 0..=240 {
            let t = 0.025 * k as f64;
            rows.push_str(&format!("{t},{},0\n", (-t * t).exp()));
        }
        ws.write("gauss.csv", &rows);
        ws.write("points.csv", "x\n0.5\n1.0\n2.0\n");
        ws
    }

    fn write(&self, name: &str, text: &str) {
        fs::write(self.dir.path().join(name), text).unwrap();
    }

    fn path(&self, name: &str) -> String {
        self.dir.path().join(name).display().to_string()
    }

    fn file(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

#[test]
fn eval_matches_the_rank_one_oracle() {
    let ws = Workspace::new();
    let (code, out, err) = run(&["eval", "--system", &ws.path("a1.json"), "--lambda", "0.5", "--x", "2.0"]);
    assert_eq!(code, 0, "{err}");
    let v = assert_valid("eval", &out);
    let value = Complex64::new(v["value"]["re"].as_f64().unwrap(), v["value"]["im"].as_f64().unwrap());
    let expected = jacobi_phi_first(JacobiParams::new(1.0, 0.0), Complex64::new(0.5, 0.0), 2.0).unwrap();
    assert!((value - expected).norm() <= 1e-8 * expected.norm(), "{value} vs {expected}");
    assert_eq!(v["branch"], "generic");
}

#[test]
fn eval_grid_and_csv() {
    let ws = Workspace::new();
    let (code, out, _) = run(&["eval", "--system", &ws.path("bc1.json"), "--lambda", "0.3-1.2i", "--grid", &ws.path("points.csv")]);
    assert_eq!(code, 0);
    let v = assert_valid("eval", &out);
    assert_eq!(v["results"].as_array().unwrap().len(), 3);

    let (code, out, _) = run(&["eval", "--system", &ws.path("a2.json"), "--lambda", "0.2,0.1i", "--x", "1.0,0.2", "--format", "csv"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "x1,x2,re,im,branch");
    assert_eq!(lines.len(), 2);
}

#[test]
fn classify_boundary_point_is_bounded() {
    let ws = Workspace::new();
    let (code, out, _) = run(&["classify", "--system", &ws.path("a1.json"), "--lambda", "0.5"]);
    assert_eq!(code, 0);
    let v = assert_valid("classify", &out);
    assert_eq!(v["bounded"], true);

    let (_, out, _) = run(&["classify", "--system", &ws.path("a1.json"), "--lambda", "0.6+3i"]);
    let v = assert_valid("classify", &out);
    assert_eq!(v["bounded"], false);
}

#[test]
fn series_coeffs_cfunc_and_asymptotics_follow_their_schemas() {
    let ws = Workspace::new();
    let (code, out, _) = run(&["series-coeffs", "--system", &ws.path("a2.json"), "--lambda", "0.3,0.4i", "--level", "4", "--format", "json"]);
    assert_eq!(code, 0);
    let v = assert_valid("series-coeffs", &out);
    assert_eq!(v["coefficients"].as_array().unwrap().len(), 6);

    let (code, out, _) = run(&["series-coeffs", "--system", &ws.path("a1.json"), "--lambda", "0.3", "--level", "6"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().next(), Some("n1,re,im"));
    assert_eq!(out.lines().count(), 5);

    for lam in ["0.7+0.2i", "-1"] {
        let (code, out, err) = run(&["cfunc", "--system", &ws.path("bc1.json"), "--lambda", lam]);
        assert_eq!(code, 0, "{err}");
        assert_valid("cfunc", &out);
    }

    let (code, out, _) = run(&["asymptotics", "--system", &ws.path("a1.json"), "--lambda", "0", "--direction", "1", "--format", "json"]);
    assert_eq!(code, 0);
    assert_valid("asymptotics", &out);
    let (code, out, _) = run(&["asymptotics", "--system", &ws.path("a1.json"), "--lambda", "0.8", "--direction", "1", "--t", "1,2,4"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().next(), Some("t,ratio,predicted_limit"));
    assert_eq!(out.lines().count(), 4);
}

#[test]
fn transform_modes() {
    let ws = Workspace::new();
    let base = ["transform", "--system", &ws.path("a1.json") as &str, "--input", &ws.path("gauss.csv")];
    let cfg = ws.path("spectral.json");

    let mut args = base.to_vec();
    args.extend(["--mode", "forward", "--lambda", "0.5", "--lambda", "1.5i", "--format", "json"]);
    let (code, out, err) = run(&args);
    assert_eq!(code, 0, "{err}");
    assert_valid("transform", &out);

    let mut args = base.to_vec();
    args.extend(["--mode", "plancherel", "--transform-config", &cfg]);
    let (code, out, err) = run(&args);
    assert_eq!(code, 0, "{err}");
    let v = assert_valid("transform", &out);
    assert!((v["calibrated_ratio"].as_f64().unwrap() - 1.0).abs() < 1e-2, "{out}");

    // Round trip through the spectral side.
    ws.write("wide.json", r#"{"spectral_radius": 8.0}"#);
    let wide = ws.path("wide.json");
    let spectrum = ws.path("spectrum.csv");
    let mut args = base.to_vec();
    args.extend(["--mode", "forward", "--transform-config", &wide, "--points", "241", "--out", &spectrum]);
    assert_eq!(run(&args).0, 0);
    let (code, out, err) = run(&[
        "transform", "--system", &ws.path("a1.json"), "--input", &spectrum, "--mode", "inverse",
        "--transform-config", &wide, "--x", "0.5", "--x", "1.0", "--x", "2.0", "--format", "json",
    ]);
    assert_eq!(code, 0, "{err}");
    let v = assert_valid("transform", &out);
    for item in v["values"].as_array().unwrap() {
        let x = item["x"][0].as_f64().unwrap();
        let re = item["value"]["re"].as_f64().unwrap();
        assert!((re - (-x * x).exp()).abs() < 1e-5, "{x}: {re}");
    }

    let out_path = ws.path("forward.csv");
    let mut args = base.to_vec();
    args.extend(["--mode", "forward", "--points", "9", "--out", &out_path]);
    let (code, out, _) = run(&args);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let written = fs::read_to_string(ws.file("forward.csv")).unwrap();
    assert_eq!(written.lines().next(), Some("tau1,re,im"));
    assert_eq!(written.lines().count(), 10);
}

#[test]
fn unbounded_forward_request_is_a_domain_error() {
    let ws = Workspace::new();
    let (code, out, err) = run(&[
        "transform", "--system", &ws.path("a1.json"), "--input", &ws.path("gauss.csv"),
        "--mode", "forward", "--lambda", "0.9",
    ]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    let v = assert_valid("error", &err);
    assert_eq!(v["error"]["kind"], "unbounded_lambda");
}

#[test]
fn exit_codes() {
    let ws = Workspace::new();
    // Usage errors.
    assert_eq!(exec(&[]).status.code(), Some(1));
    assert_eq!(exec(&["eval", "--system", &ws.path("a1.json"), "--lambda", "0.5"]).status.code(), Some(1));
    assert_eq!(exec(&["eval", "--system", &ws.path("a1.json"), "--lambda", "zz", "--x", "1"]).status.code(), Some(1));
    assert_eq!(exec(&["frobnicate"]).status.code(), Some(1));
    // Help and version.
    assert_eq!(exec(&["--help"]).status.code(), Some(0));
    assert_eq!(exec(&["--version"]).status.code(), Some(0));
    // Domain and IO errors carry a JSON body on stderr.
    for args in [
        vec!["eval", "--system", "/nonexistent/sys.json", "--lambda", "0.5", "--x", "1"],
        vec!["eval", "--system", &ws.path("a1.json"), "--lambda", "0.5,1", "--x", "1"],
        vec!["cfunc", "--system", &ws.path("a1.json"), "--lambda", "0.5", "--radius=-1"],
    ] {
        let output = exec(&args);
        assert_eq!(output.status.code(), Some(2), "{args:?}");
        assert!(output.stdout.is_empty());
        assert_valid("error", &String::from_utf8(output.stderr).unwrap());
    }
    ws.write("bad.json", r#"{"family":"E","rank":8,"multiplicities":{"short":1.0}}"#);
    let output = exec(&["classify", "--system", &ws.path("bad.json"), "--lambda", "0"]);
    assert_eq!(output.status.code(), Some(2));
    let v = assert_valid("error", &String::from_utf8(output.stderr).unwrap());
    assert_eq!(v["error"]["kind"], "root_system");
}

#[test]
fn output_is_byte_identical_across_runs() {
    let ws = Workspace::new();
    let args = ["eval", "--system", &ws.path("a2.json") as &str, "--lambda", "0.4-0.3i,1.1", "--grid", &ws.path("points2.csv")];
    ws.write("points2.csv", "1.2,0.6\n1.5,0.4\n2.5,1.0\n");
    let first = exec(&args);
    let second = bin().env("HYPERGEO_THREADS", "1").args(args).output().unwrap();
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    assert_valid("eval", &String::from_utf8(first.stdout).unwrap());
}

#[test]
fn selftest_passes() {
    let output = exec(&["selftest", "--format", "json"]);
    assert_eq!(output.status.code(), Some(0), "{}", String::from_utf8_lossy(&output.stderr));
    let v = assert_valid("selftest", &String::from_utf8(output.stdout).unwrap());
    assert_eq!(v["passed"], true);

    let output = exec(&["selftest"]);
    assert_eq!(output.status.code(), Some(0));
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.lines().count() >= 5 && text.lines().all(|l| l.ends_with("PASS")), "{text}");
}
