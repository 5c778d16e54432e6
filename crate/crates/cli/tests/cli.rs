use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const COARSE: &str = r#"{"instance":{"alpha":0.75,"n":1,"T":40.0,"N":1024,"L":{"kind":"scalar_poly","p":1.0},"W":{"kind":"pure_power","mu":4.0,"b":"const:1.0"}},"solver":{"restarts":2}}"#;

fn frachamil(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frachamil"))
        .args(args)
        .current_dir(dir)
        .env_remove("FRACHAMIL_SEED")
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_grid_csv(path: &Path, n: usize, half: f64, f: impl Fn(f64) -> f64) {
    let dt = 2.0 * half / n as f64;
    let mut s = String::from("t,u\n");
    for j in 0..n {
        let t = -half + j as f64 * dt;
        s.push_str(&format!("{t},{}\n", f(t)));
    }
    std::fs::write(path, s).unwrap();
}

fn read_columns(path: &Path) -> (String, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn solve_writes_fixed_schema_and_reproduces_from_manifest() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.json"), COARSE).unwrap();
    let o = frachamil(&["solve", "c.json", "--out", "a"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let text = std::fs::read_to_string(dir.path().join("a/solution.json")).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(|k| k.as_str()).collect();
    let mut expect = vec![
        "critical_value", "grad_norm", "beta", "rho", "nehari_value", "iterations", "tail_max", "converged", "norms",
    ];
    expect.sort();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(sorted, expect);
    let norms: Vec<&str> = v["norms"].as_object().unwrap().keys().map(|k| k.as_str()).collect();
    assert_eq!(norms.len(), 3);
    for k in ["l2", "alpha", "X"] {
        assert!(norms.contains(&k));
    }
    assert_eq!(v["converged"], Value::Bool(true));
    assert!(v["critical_value"].as_f64().unwrap() >= v["beta"].as_f64().unwrap());

    let (header, rows) = read_columns(&dir.path().join("a/profile.csv"));
    assert_eq!(header, "t,u_1");
    assert_eq!(rows.len(), 1024);

    let o = frachamil(&["solve", "a/manifest.json", "--out", "b"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let again = std::fs::read_to_string(dir.path().join("b/solution.json")).unwrap();
    assert_eq!(text, again);
    assert_eq!(
        std::fs::read(dir.path().join("a/profile.csv")).unwrap(),
        std::fs::read(dir.path().join("b/profile.csv")).unwrap()
    );
}

#[test]
fn seed_variable_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.json"), COARSE).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_frachamil"))
        .args(["nehari", "c.json"])
        .current_dir(dir.path())
        .env("FRACHAMIL_SEED", "7")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["seed"], 7);
    assert_eq!(v["restart_values"].as_array().unwrap().len(), 2);
    assert!(v["nehari_value"].as_f64().unwrap() > 0.46);

    let o = Command::new(env!("CARGO_BIN_EXE_frachamil"))
        .args(["nehari", "c.json"])
        .current_dir(dir.path())
        .env("FRACHAMIL_SEED", "seven")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn invalid_configs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let mu2 = COARSE.replace(r#""mu":4.0"#, r#""mu":2.0"#);
    std::fs::write(dir.path().join("mu2.json"), mu2).unwrap();
    let o = frachamil(&["solve", "mu2.json", "--out", "x"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("(W₁)"), "{}", stderr(&o));

    let o = frachamil(&["solve", "missing.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));

    let low = COARSE.replace(r#""alpha":0.75"#, r#""alpha":0.4"#);
    std::fs::write(dir.path().join("low.json"), low).unwrap();
    let o = frachamil(&["nehari", "low.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn iteration_cap_exits_three_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let capped = COARSE.replace(r#""restarts":2"#, r#""restarts":1,"max_iter":3"#);
    std::fs::write(dir.path().join("c.json"), capped).unwrap();
    let o = frachamil(&["solve", "c.json", "--out", "r"], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("r/solution.json")).unwrap()).unwrap();
    assert_eq!(v["converged"], Value::Bool(false));
    assert_eq!(v["iterations"], 3);
    assert!(dir.path().join("r/diagnostics.json").exists());
    assert!(dir.path().join("r/manifest.json").exists());
}

#[test]
fn verify_passes_and_detects_the_branch_flip() {
    let dir = tempfile::tempdir().unwrap();
    let o = frachamil(&["verify", "--level", "fast"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.contains("0 failed"));

    let o = frachamil(&["verify", "--inject"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let out = String::from_utf8_lossy(&o.stdout);
    let row = out.lines().find(|l| l.starts_with("seminorm identity")).unwrap();
    assert!(row.contains("FAIL"));
    assert!(out.contains("1 failed"));
}

#[test]
fn derivative_of_zero_and_cosine() {
    let dir = tempfile::tempdir().unwrap();
    let (n, half) = (256, 20.0);
    write_grid_csv(&dir.path().join("zero.csv"), n, half, |_| 0.0);
    let o = frachamil(&["derivative", "zero.csv", "--alpha", "0.5", "--side", "left", "--out", "dz.csv"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (header, rows) = read_columns(&dir.path().join("dz.csv"));
    assert_eq!(header, "t,du");
    assert!(rows.iter().all(|r| r[1] == 0.0));

    let lambda = PI * 7.0 / half;
    write_grid_csv(&dir.path().join("cos.csv"), n, half, |t| (lambda * t).cos());
    for (side, sign) in [("left", 1.0), ("right", -1.0)] {
        let o = frachamil(&["derivative", "cos.csv", "--alpha", "0.5", "--side", side], dir.path());
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let text = String::from_utf8(o.stdout).unwrap();
        for line in text.lines().skip(1) {
            let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
            let exact = lambda.sqrt() * (lambda * v[0] + sign * PI / 4.0).cos();
            assert!((v[1] - exact).abs() < 1e-10, "{side}: {} vs {exact}", v[1]);
        }
    }
}

#[test]
fn derivative_check_column_and_grid_errors() {
    let dir = tempfile::tempdir().unwrap();
    write_grid_csv(&dir.path().join("g.csv"), 1024, 20.0, |t| (-t * t).exp());
    let o = frachamil(
        &["derivative", "g.csv", "--alpha", "0.75", "--side", "right", "--check", "--out", "d.csv"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("max |spectral - marchaud|"));
    let (header, rows) = read_columns(&dir.path().join("d.csv"));
    assert_eq!(header, "t,du,marchaud");
    let worst = rows.iter().map(|r| (r[1] - r[2]).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-4, "{worst}");

    let text = std::fs::read_to_string(dir.path().join("g.csv")).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    lines[10] = format!("{},{}", -18.9, 0.0);
    std::fs::write(dir.path().join("bad.csv"), lines.join("\n")).unwrap();
    let o = frachamil(&["derivative", "bad.csv", "--alpha", "0.75", "--side", "left"], dir.path());
    assert_eq!(o.status.code(), Some(2));

    std::fs::write(dir.path().join("hdr.csv"), "x,y\n0,0\n").unwrap();
    let o = frachamil(&["derivative", "hdr.csv", "--alpha", "0.75", "--side", "left"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}
