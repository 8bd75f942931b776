use std::time::Instant;

use osb::{parse_spec, run_verify, Level, OsbError};
use osb_core::{BodySpec, ToleranceConfig};

fn names(checks: &[osb::CheckReport]) -> Vec<&str> {
    checks.iter().map(|c| c.check.as_str()).collect()
}

#[test]
fn quick_ball_passes_fast() {
    let start = Instant::now();
    let report = run_verify(&BodySpec::Ball { dim: 4 }, Level::Quick, 1, None).unwrap();
    assert!(start.elapsed().as_secs_f64() < 5.0);
    assert!(report.pass, "{report:#?}");
    assert!(report.culprit().is_none());
    assert_eq!(report.dim, Some(4));
    let skipped: Vec<&str> = report.skipped.iter().map(|s| s.check.as_str()).collect();
    assert_eq!(skipped, ["area_construction", "area_ratio"]);
    let ran = names(&report.checks);
    for want in ["convexity_probe", "self_polarity", "involution", "positivity", "invariance", "two_point", "mahler"] {
        assert!(ran.contains(&want), "{want} missing from {ran:?}");
    }
}

#[test]
fn lagrangian_sum_passes_full_without_c2_checks() {
    let spec = parse_spec(r#"{"v":1,"type":"lagrangian_sum","k":{"type":"lp_ball","p":4,"dim":2}}"#).unwrap();
    let report = run_verify(&spec, Level::Full, 3, None).unwrap();
    assert!(report.pass, "{:?}", report.culprit());
    let ran = names(&report.checks);
    assert!(ran.contains(&"invariance") && ran.contains(&"ray_multiplicity"));
    assert!(!ran.contains(&"positivity") && !ran.contains(&"planarity"));
    let skipped: Vec<&str> = report.skipped.iter().map(|s| s.check.as_str()).collect();
    assert!(skipped.contains(&"positivity"));
}

#[test]
fn planar_bodies_run_the_area_checks() {
    let spec = BodySpec::PatchedSelfPolar {
        n: 1,
        epsilon: 0.2,
        delta: 0.03,
        seed: 7,
    };
    let report = run_verify(&spec, Level::Quick, 2, None).unwrap();
    assert!(report.pass, "{:?}", report.culprit());
    let ran = names(&report.checks);
    assert!(ran.contains(&"area_construction") && ran.contains(&"area_ratio"));
}

#[test]
fn oversized_dent_is_caught_by_the_convexity_probe() {
    let spec = BodySpec::PatchedSelfPolar {
        n: 1,
        epsilon: 0.2,
        delta: 0.6,
        seed: 7,
    };
    let report = run_verify(&spec, Level::Quick, 1, None).unwrap();
    assert!(!report.pass);
    assert_eq!(report.culprit().unwrap().check, "convexity_probe");
    assert!(report.body_label.is_none());
}

#[test]
fn non_self_polar_body_skips_the_dynamics() {
    let spec = BodySpec::LpBall { p: 4.0, dim: 4 };
    let report = run_verify(&spec, Level::Quick, 1, None).unwrap();
    assert!(!report.pass);
    let culprit = report.culprit().unwrap();
    assert_eq!(culprit.check, "self_polarity");
    assert!(culprit.worst_value.unwrap() >= 0.05);
    let skipped: Vec<&str> = report.skipped.iter().map(|s| s.check.as_str()).collect();
    assert!(skipped.contains(&"involution") && skipped.contains(&"invariance"));
    assert!(!names(&report.checks).contains(&"involution"));
}

#[test]
fn reports_are_deterministic() {
    let spec = BodySpec::Ball { dim: 2 };
    let a = run_verify(&spec, Level::Quick, 11, None).unwrap();
    let b = run_verify(&spec, Level::Quick, 11, None).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn invalid_tolerances_are_input_errors() {
    let bad = ToleranceConfig {
        eq_tol: 0.0,
        ..ToleranceConfig::default()
    };
    let err = run_verify(&BodySpec::Ball { dim: 2 }, Level::Quick, 1, Some(bad)).unwrap_err();
    assert_eq!(err.exit_code(), 2, "{err}");
    assert!(matches!(err, OsbError::Core(_)));
}
