use std::process::{Command, Output};

use serde_json::Value;

fn confdyn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_confdyn")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn keys(v: &Value) -> Vec<String> {
    let mut k: Vec<String> = v.as_object().unwrap().keys().cloned().collect();
    k.sort();
    k
}

#[test]
fn solve_center_reports_the_rabbit() {
    let v = json(&confdyn(&["solve", "center", "--period", "3", "--seed", " -0.12+0.74i"]));
    assert_eq!(
        keys(&v),
        ["checks", "converged", "iterations", "name", "parameter_im", "parameter_re", "residual"]
    );
    assert!((v["parameter_re"].as_f64().unwrap() + 0.122561).abs() < 5e-6);
    assert!((v["parameter_im"].as_f64().unwrap() - 0.744862).abs() < 5e-6);
    assert_eq!(v["converged"], Value::Bool(true));
}

#[test]
fn rotation_number_of_the_basilica_cycle() {
    let v = json(&confdyn(&["ray", "rotation", "--angles", "1/3,2/3", "--degree", "2"]));
    assert_eq!(v, serde_json::json!({ "rotation_number": "1/2" }));
    let v = json(&confdyn(&["ray", "rotation", "--angles", "1/7"]));
    assert_eq!(v["rotation_number"], "1/3");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(confdyn(&["solve", "center", "--period", "3"]).status.code(), Some(2));
    assert_eq!(confdyn(&["solve", "center", "--period", "3", "--seed", "oops"]).status.code(), Some(2));
    assert_eq!(confdyn(&["render", "mandelbrot", "--out", "x.pgm", "--frobnicate"]).status.code(), Some(2));
    assert_eq!(confdyn(&["ray", "rotation", "--angles", "1/5"]).status.code(), Some(2));
    assert_eq!(confdyn(&["--threads", "0", "solve", "mating"]).status.code(), Some(2));
    assert_eq!(confdyn(&["--help"]).status.code(), Some(0));
}

#[test]
fn identity_checks_pass() {
    for cmd in [["solve", "mating"], ["solve", "intertwine"]] {
        let v = json(&confdyn(&cmd));
        assert!(v["checks"].as_array().unwrap().iter().all(|c| c["pass"] == Value::Bool(true)));
    }
}

#[test]
fn misiurewicz_fallback_reports_the_reduced_relation() {
    let plain = confdyn(&["solve", "misiurewicz", "--preperiod", "6", "--period", "3", "--seed=-0.101+0.956i"]);
    assert_eq!(plain.status.code(), Some(1));
    let v = json(&confdyn(&[
        "solve",
        "misiurewicz",
        "--preperiod",
        "6",
        "--period",
        "3",
        "--seed=-0.101+0.956i",
        "--fallback",
    ]));
    assert_eq!(v["name"], "misiurewicz-4-1");
    assert!((v["parameter_re"].as_f64().unwrap() + 0.101096).abs() < 5e-6);
}

#[test]
fn renders_are_deterministic_images() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.ppm");
    let b = dir.path().join("b.ppm");
    for path in [&a, &b] {
        let out = confdyn(&[
            "--threads",
            "2",
            "render",
            "julia",
            "--coeffs",
            "0.5+0.8660254037844386i;0;1",
            "--denominator",
            "-1;0;1",
            "--mode",
            "cloud",
            "--points",
            "5000",
            "--seed",
            "3",
            "--pixels",
            "64",
            "--width",
            "6",
            "--out",
            path.to_str().unwrap(),
        ]);
        let v = json(&out);
        assert!(v["distinct_values"].as_u64().unwrap() >= 2);
    }
    let (x, y) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert!(x.starts_with(b"P6\n64 64\n255\n"));
    assert_eq!(x, y);

    let gray = dir.path().join("m.pgm");
    let v = json(&confdyn(&[
        "render",
        "mandelbrot",
        "--center=-0.5",
        "--width",
        "3",
        "--pixels",
        "48",
        "--colormap",
        "gray",
        "--out",
        gray.to_str().unwrap(),
    ]));
    assert_eq!(v["width"], 48);
    assert!(std::fs::read(&gray).unwrap().starts_with(b"P5\n"));
}

#[test]
fn henon_slice_reports_the_constructed_map() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("h.pgm");
    let v = json(&confdyn(&[
        "render",
        "henon",
        "--lambda",
        "0.3",
        "--mu",
        "0.3",
        "--pixels",
        "32",
        "--out",
        out.to_str().unwrap(),
    ]));
    assert!((v["delta_re"].as_f64().unwrap() - 0.09).abs() < 1e-15);
    assert!((v["fixed_point_re"].as_f64().unwrap() - 0.3).abs() < 1e-15);
}

#[test]
fn linearize_and_thurston_documents() {
    let v = json(&confdyn(&["linearize", "brjuno", "--x", "0.6180339887498949", "--n", "5"]));
    assert_eq!(keys(&v), ["partial_quotients", "partial_sums", "verdict"]);
    assert_eq!(v["partial_quotients"].as_array().unwrap().len(), 6);

    let v = json(&confdyn(&["linearize", "cremer", "--depth", "3"]));
    assert_eq!(v["verdict"], "divergent-looking");
    assert_eq!(v["partial_quotients"][1], "55");

    let v = json(&confdyn(&["thurston", "run"]));
    assert_eq!(v["converged"], Value::Bool(true));
    assert_eq!(v["kneading_match"], Value::Bool(true));

    let v = json(&confdyn(&["thurston", "run", "--family", "alpha", "--alpha", "3"]));
    assert_eq!(v["alpha"], 3.0);
}

#[test]
fn ray_trace_lands_for_the_rabbit() {
    let v = json(&confdyn(&["ray", "trace", "--c=-0.12256116687665+0.74486176661974i", "--angle", "1/7"]));
    assert_eq!(v["converged"], Value::Bool(true));
    assert!((v["landing_re"].as_f64().unwrap() + 0.2763376).abs() < 1e-6);
}
