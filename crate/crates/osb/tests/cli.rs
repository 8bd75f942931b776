use std::f64::consts::{SQRT_2, TAU};
use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

use serde_json::Value;

const BALL2: &str = r#"{"v":1,"type":"ball","dim":2}"#;
const BALL4: &str = r#"{"v":1,"type":"ball","dim":4}"#;
const ELLIPSE: &str = r#"{"v":1,"type":"linear_image","inner":{"type":"ball","dim":2},"matrix":[[2,0],[0,0.5]]}"#;
const L4_SUM: &str = r#"{"v":1,"type":"lagrangian_sum","k":{"type":"lp_ball","p":4,"dim":2}}"#;
const L4_BALL: &str = r#"{"v":1,"type":"lp_ball","p":4,"dim":4}"#;
const PATCHED2: &str = r#"{"v":1,"type":"patched_self_polar","n":1,"epsilon":0.2,"delta":0.03,"seed":7}"#;
const PATCHED4: &str = r#"{"v":1,"type":"patched_self_polar","n":2,"epsilon":0.1,"delta":0.02,"seed":7}"#;

fn osb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_osb"))
        .args(args)
        .output()
        .expect("osb runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("UTF-8 output")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("UTF-8 output")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(out)))
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

/// Data rows of a CSV with a header line.
fn rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').filter(|c| !c.is_empty()).map(|c| c.parse().unwrap()).collect())
        .collect()
}

fn write_circle(path: &Path, r: f64, n: usize) {
    let mut text = String::from("x,y\n");
    for k in 0..n {
        let t = TAU * k as f64 / n as f64;
        text.push_str(&format!("{:e},{:e}\n", r * t.cos(), r * t.sin()));
    }
    std::fs::write(path, text).unwrap();
}

#[test]
fn body_eval_and_boundary_samples() {
    let out = osb(&["body", "--spec", BALL4, "--eval", "1,0,0,0"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).trim().parse::<f64>().unwrap(), 1.0);
    let out = osb(&["body", "--spec", BALL4, "--eval", "-3,0,4,0"]);
    assert_eq!(stdout(&out).trim().parse::<f64>().unwrap(), 5.0);

    let out = osb(&["body", "--spec", BALL4, "--boundary-samples", "100", "--seed", "1"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.starts_with("x_1,x_2,x_3,x_4\n"));
    let pts = rows(&text);
    assert_eq!(pts.len(), 100);
    for p in &pts {
        let norm = p.iter().map(|c| c * c).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() <= 1e-12);
    }

    let out = osb(&["body", "--spec", ELLIPSE, "--boundary-samples", "64"]);
    let pts = rows(&stdout(&out));
    assert_eq!(pts.len(), 64);
    for p in &pts {
        assert!((p[0] * p[0] / 4.0 + 4.0 * p[1] * p[1] - 1.0).abs() <= 1e-12);
    }

    let summary = json(&osb(&["body", "--spec", L4_SUM]));
    assert_eq!(summary["dim"], 4);
    assert_eq!(summary["smoothness"], "C1");
}

#[test]
fn input_errors_exit_2() {
    let cases: [&[&str]; 7] = [
        &["body", "--spec", r#"{"v":1,"type":"ball""#],
        &["body", "--spec", r#"{"type":"ball","dim":2}"#],
        &["body", "--spec", r#"{"v":1,"type":"ball","dim":2,"x":1}"#],
        &["body", "--spec", "/nonexistent/spec.json"],
        &["body", "--spec", BALL4, "--eval", "1,0"],
        &["body", "--spec", BALL2, "--eq-tol=-1"],
        &["orbit", "--spec", BALL2, "--start", "0.5,0", "--steps", "3"],
    ];
    for args in cases {
        let out = osb(args);
        assert_eq!(code(&out), 2, "{args:?}: {}", stderr(&out));
        assert!(stderr(&out).starts_with("osb: "), "{}", stderr(&out));
    }
    // usage errors from the argument parser use the same code
    assert_eq!(code(&osb(&["periodic4", "--spec", BALL2])), 2);
}

#[test]
fn spec_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ball4.json");
    std::fs::write(&path, "{\n  \"v\": 1,\n  \"type\": \"ball\",\n  \"dim\": 4\n}\n").unwrap();
    let out = osb(&["body", "--spec", path.to_str().unwrap(), "--eval", "0,2,0,0"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).trim().parse::<f64>().unwrap(), 2.0);

    std::fs::write(&path, "{\n  \"v\": 1,\n  \"type\": \"ball\"\n  \"dim\": 4\n}\n").unwrap();
    let out = osb(&["body", "--spec", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line 4"), "{}", stderr(&out));
}

#[test]
fn disk_orbit_closes_after_three_steps() {
    let out = osb(&["orbit", "--spec", BALL2, "--start", "2,0", "--steps", "3"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.starts_with("step,z_1,z_2,x_1,x_2,t,residual\n"));
    let r = rows(&text);
    assert_eq!(r.len(), 4);
    assert!((r[3][1] - 2.0).abs() <= 1e-8 && r[3][2].abs() <= 1e-8);
    // forward rotation is counterclockwise by 2 arccos(1/2)
    let angle = r[1][2].atan2(r[1][1]);
    assert!((angle - 2.0 * (0.5f64).acos()).abs() <= 1e-9);

    let back = rows(&stdout(&osb(&["orbit", "--spec", BALL2, "--start", "2,0", "--steps", "1", "--inverse"])));
    assert!((back[1][2].atan2(back[1][1]) + angle).abs() <= 1e-9);
}

#[test]
fn orbit_json_carries_metadata() {
    let out = osb(&["orbit", "--spec", BALL2, "--start", "0,3", "--steps", "5", "--format", "json", "--seed", "4"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["v"], 1);
    assert_eq!(v["seed"], 4);
    assert_eq!(v["steps"], 5);
    assert_eq!(v["orientation"], "forward");
    assert_eq!(v["rows"].as_array().unwrap().len(), 6);
    assert!(v["rows"][5]["x"].is_null());
    assert!((num(&v["boundedness"]["max_norm"]) - 3.0).abs() <= 1e-12);
    assert!(v["failure"].is_null());
}

#[test]
fn long_patched_orbit_reports_boundedness() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("orbit.csv");
    let out = osb(&[
        "orbit",
        "--spec",
        PATCHED2,
        "--start",
        "1.3,0.4",
        "--steps",
        "100000",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    let stats: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(stats["steps"], 100_000);
    let (lo, hi) = (num(&stats["min_norm"]), num(&stats["max_norm"]));
    assert!(1.0 < lo && lo <= hi && hi.is_finite());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 100_002);
}

#[test]
fn periodic4_examples() {
    let v = json(&osb(&["periodic4", "--spec", BALL2, "--boundary-angle", "0"]));
    assert_eq!(v["pass"], true);
    assert!(num(&v["edge_defect"]) <= 1e-9);
    assert!((num(&v["area"]) - 4.0).abs() <= 1e-12);
    let square = [[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]];
    for (z, want) in v["vertices"].as_array().unwrap().iter().zip(square) {
        assert!((num(&z[0]) - want[0]).abs() <= 1e-12 && (num(&z[1]) - want[1]).abs() <= 1e-12);
    }

    let v = json(&osb(&["periodic4", "--spec", ELLIPSE, "--direction", "1,0"]));
    assert_eq!(v["pass"], true);
    for z in v["vertices"].as_array().unwrap() {
        assert!((num(&z[0]).abs() - 2.0).abs() <= 1e-9 && (num(&z[1]).abs() - 0.5).abs() <= 1e-9);
    }

    let v = json(&osb(&["periodic4", "--spec", PATCHED4, "--direction", "1,0.5,-0.2,0.3"]));
    assert_eq!(v["pass"], true);

    // on the axes the l4 ball passes the local gate but the edges do not close
    let out = osb(&["periodic4", "--spec", L4_BALL, "--direction", "1,0,0,0"]);
    assert_eq!(code(&out), 3);
    let v = json(&out);
    assert_eq!(v["pass"], false);
    assert!(num(&v["edge_defect"]) > num(&v["edge_tolerance"]));

    let out = osb(&["periodic4", "--spec", L4_BALL, "--direction", "1,0.5,-0.2,0.3"]);
    assert_eq!(code(&out), 3);
    let v = json(&out);
    assert_eq!(v["check"], "self_polarity");
    assert!(num(&v["defect"]) >= 0.05);

    assert_eq!(code(&osb(&["periodic4", "--spec", BALL4, "--boundary-angle", "0"])), 2);
}

#[test]
fn hypersurface_checks_pass_on_the_ball() {
    for check in ["invariance", "star", "two-point", "transversality", "planarity"] {
        let out = osb(&["hypersurface", "--spec", BALL4, "--check", check, "--samples", "20", "--seed", "2"]);
        assert_eq!(code(&out), 0, "{check}: {}", stderr(&out));
        let v = json(&out);
        assert_eq!(v["pass"], true, "{check}");
        let worst = num(&v["worst_value"]);
        match v["bound"].as_str().unwrap() {
            "at_most" => assert!(worst <= num(&v["tolerance"]), "{check}"),
            _ => assert!(worst > num(&v["tolerance"]), "{check}"),
        }
    }
}

#[test]
fn hypersurface_checks_on_patched_bodies() {
    for check in ["invariance", "star", "two-point"] {
        let out = osb(&["hypersurface", "--spec", PATCHED2, "--check", check, "--samples", "50", "--seed", "2"]);
        assert_eq!(code(&out), 0, "{check}");
        assert_eq!(json(&out)["pass"], true, "{check}");
    }
    let out = osb(&["hypersurface", "--spec", PATCHED4, "--check", "planarity", "--samples", "2", "--seed", "2"]);
    assert_eq!(code(&out), 0, "planarity is advisory");
    let v = json(&out);
    assert_eq!(v["advisory"], true);
    let note = v["note"].as_str().unwrap();
    let delta: f64 = note.rsplit(' ').next().unwrap().parse().unwrap();
    assert!(delta > 0.0, "{note}");
}

#[test]
fn emitted_y_of_the_disk_is_the_root_two_circle() {
    let out = osb(&["hypersurface", "--spec", BALL2, "--emit-y", "--samples", "100", "--seed", "0"]);
    assert_eq!(code(&out), 0);
    let pts = rows(&stdout(&out));
    assert_eq!(pts.len(), 100);
    for p in pts {
        assert!((p[0].hypot(p[1]) - SQRT_2).abs() <= 1e-12);
    }
}

#[test]
fn recover_examples() {
    let dir = tempfile::tempdir().unwrap();
    let y = dir.path().join("y.csv");
    let truth = dir.path().join("truth.csv");
    let report = dir.path().join("report.json");
    write_circle(&y, SQRT_2, 10_000);
    write_circle(&truth, 1.0, 10_000);
    let out = osb(&[
        "recover",
        "--y-curve",
        y.to_str().unwrap(),
        "--truth",
        truth.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let pts = rows(&stdout(&out));
    assert_eq!(pts.len(), 10_000);
    for p in &pts {
        assert!((p[0].hypot(p[1]) - 1.0).abs() <= 1e-6);
    }
    let rep: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert!(num(&rep["hausdorff"]) <= 1e-5);
    assert!((num(&rep["y_area"]) - TAU).abs() <= 1e-6);

    let small = dir.path().join("small.csv");
    write_circle(&small, 1.0, 1000);
    let out = osb(&["recover", "--y-curve", small.to_str().unwrap()]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));

    std::fs::write(&small, "x,y\n1,0\n0,oops\n").unwrap();
    let out = osb(&["recover", "--y-curve", small.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("row"), "{}", stderr(&out));
}

#[test]
fn recover_patched_body_from_its_emitted_y() {
    let dir = tempfile::tempdir().unwrap();
    let y = dir.path().join("y.csv");
    let truth = dir.path().join("truth.csv");
    let report = dir.path().join("report.json");
    let emit = osb(&["hypersurface", "--spec", PATCHED2, "--emit-y", "--samples", "10000", "--seed", "0", "-o", y.to_str().unwrap()]);
    assert_eq!(code(&emit), 0);
    let boundary = osb(&["body", "--spec", PATCHED2, "--boundary-samples", "10000", "-o", truth.to_str().unwrap()]);
    assert_eq!(code(&boundary), 0);
    let out = osb(&[
        "recover",
        "--y-curve",
        y.to_str().unwrap(),
        "--truth",
        truth.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let rep: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert!(num(&rep["hausdorff"]) <= 1e-4, "{rep}");
}

#[test]
fn verify_exit_codes() {
    let start = Instant::now();
    let out = osb(&["verify", "--spec", BALL2, "--level", "quick", "--seed", "1"]);
    assert!(start.elapsed().as_secs_f64() < 5.0);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["pass"], true);

    let broken = r#"{"v":1,"type":"patched_self_polar","n":1,"epsilon":0.2,"delta":0.6,"seed":7}"#;
    let out = osb(&["verify", "--spec", broken, "--seed", "1"]);
    assert_eq!(code(&out), 3);
    let v = json(&out);
    assert_eq!(v["pass"], false);
    assert_eq!(v["checks"][0]["check"], "convexity_probe");
    assert!(stderr(&out).contains("convexity_probe"));

    let out = osb(&["verify", "--spec", L4_BALL, "--seed", "1"]);
    assert_eq!(code(&out), 3);
    let v = json(&out);
    let failed: Vec<&str> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["pass"] == false)
        .map(|c| c["check"].as_str().unwrap())
        .collect();
    assert_eq!(failed, ["self_polarity"]);
    assert!(!v["skipped"].as_array().unwrap().is_empty());
}

#[test]
fn verify_is_byte_identical_across_runs_and_thread_counts() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_osb"))
            .args(["verify", "--spec", PATCHED2, "--level", "quick", "--seed", "9"])
            .env("OSB_THREADS", threads)
            .output()
            .unwrap()
            .stdout
    };
    let a = run("1");
    assert!(!a.is_empty());
    assert_eq!(a, run("1"));
    assert_eq!(a, run("3"));
}

#[test]
fn volume_report() {
    let out = osb(&["volume", "--spec", BALL4, "--n", "200000", "--seed", "5"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    let exact = std::f64::consts::PI.powi(2) / 2.0;
    assert!((num(&v["value"]) - exact).abs() <= 4.0 * num(&v["stderr"]));
    assert_eq!(v["n"], 200_000);
    assert_eq!(v["seed"], 5);
    assert_eq!(v["method"], "monte_carlo");
    assert_eq!(num(&v["mahler"]["bound"]), 2.0);
    assert!(num(&v["mahler"]["margin"]) > 0.0);
    assert_eq!(v["mahler"]["flagged"], false);

    let again = osb(&["volume", "--spec", BALL4, "--n", "200000", "--seed", "5"]);
    assert_eq!(out.stdout, again.stdout);

    let default = osb(&["volume", "--spec", BALL2, "--n", "1000"]);
    assert_eq!(json(&default)["seed"], 0);
    assert!(stderr(&default).contains("default seed 0"));
}

#[test]
fn output_files_replace_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nested-ok.json");
    let out = osb(&["volume", "--spec", BALL2, "--n", "1000", "--seed", "1", "--output", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["n"], 1000);
    // no temporary files left behind
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn tolerance_overrides_reach_the_solver() {
    let out = osb(&["orbit", "--spec", L4_SUM, "--start", "1.5,0.2,0.1,0", "--steps", "2", "--format", "json", "--newton-tol", "1e-10", "--newton-max-iter", "80"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(num(&v["tolerances"]["newton_tol"]), 1e-10);
    assert_eq!(v["tolerances"]["newton_max_iter"], 80);
}
