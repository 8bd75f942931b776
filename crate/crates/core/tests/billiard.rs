mod common;

use std::sync::OnceLock;

use common::*;
use osb_core::billiard::*;
use osb_core::bodies::{make_linear_image, make_lp_ball};
use osb_core::linalg::random_symplectic;
use osb_core::symplectic::omega;
use osb_core::{ConvexBody, Error, Matrix, Vector};
use proptest::prelude::*;

/// Tangent point on the unit circle seen from `z`: rotate `z/|z|` by
/// `±arccos(1/|z|)`, counterclockwise for the forward map.
fn circle_tangency(z: [f64; 2], forward: bool) -> ([f64; 2], f64) {
    let r = z[0].hypot(z[1]);
    let phi = z[1].atan2(z[0]);
    let alpha = (1.0 / r).acos();
    let a = if forward { phi + alpha } else { phi - alpha };
    ([a.cos(), a.sin()], (r * r - 1.0).sqrt())
}

fn rotate(z: &Vector, angle: f64) -> Vector {
    let (c, s) = (angle.cos(), angle.sin());
    v(&[c * z[0] - s * z[1], s * z[0] + c * z[1]])
}

#[test]
fn tangency_examples() {
    let disk = ball(2);
    let z = v(&[2.0, 0.0]);
    let (x, t) = circle_tangency([2.0, 0.0], true);
    let sol = tangency_solve(&disk, &z, Orientation::Forward).unwrap();
    assert_vec_close(&sol.x.x, &v(&x), 1e-12);
    assert_vec_close(&sol.x.x, &v(&[0.5, 3f64.sqrt() / 2.0]), 1e-12);
    assert_close(sol.t, t, 1e-12);
    assert!(sol.residual <= 1e-12);

    let (xb, _) = circle_tangency([2.0, 0.0], false);
    let sol = tangency_solve(&disk, &z, Orientation::Backward).unwrap();
    assert_vec_close(&sol.x.x, &v(&xb), 1e-12);

    // the dynamics stays in span{e1, e3}, where f = J acts as on the disk
    let sol = tangency_solve(&ball(4), &v(&[2.0, 0.0, 0.0, 0.0]), Orientation::Forward).unwrap();
    assert_vec_close(&sol.x.x, &v(&[0.5, 0.0, 3f64.sqrt() / 2.0, 0.0]), 1e-12);
    assert_close(sol.t, 3f64.sqrt(), 1e-12);
}

#[test]
fn tangency_rejects_interior_and_boundary() {
    let disk = ball(2);
    assert!(matches!(outer_map(&disk, &v(&[0.2, 0.1])), Err(Error::InvalidInput(_))));
    assert!(matches!(outer_map(&disk, &v(&[0.6, 0.8])), Err(Error::InvalidInput(_))));
    assert!(matches!(outer_map(&disk, &v(&[1.0, 0.0, 0.0])), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn outer_map_examples() {
    let disk = ball(2);
    let tz = outer_map(&disk, &v(&[2.0, 0.0])).unwrap();
    assert_vec_close(&tz, &v(&[-1.0, 3f64.sqrt()]), 1e-12);
    assert_close(tz.norm(), 2.0, 1e-12);

    // equivariance: T_{LX}(Lz) = L T_X(z) with L = diag(2, 1/2)
    let tz = outer_map(&ellipse(), &v(&[4.0, 0.0])).unwrap();
    assert_vec_close(&tz, &v(&[-2.0, 3f64.sqrt() / 2.0]), 1e-12);

    for body in [ball(2), ellipse(), lagrangian_l4(), patched_r2(), patched_r4()] {
        let mut r = osb_core::rng::seeded(31, 0);
        let tol = if body.is_numeric() { 1e-5 } else { 1e-9 };
        for _ in 0..20 {
            let x = body.random_boundary_point(&mut r).unwrap();
            let f = x.f().clone();
            let image = outer_map(&body, &(&x.x + &f)).unwrap();
            assert_vec_close(&image, &(&f - &x.x), tol);
        }
    }
}

#[test]
fn inverse_examples() {
    let cases: [(ConvexBody, Vector); 2] = [(ball(2), v(&[2.0, 0.0])), (ellipse(), v(&[4.0, 0.0]))];
    for (body, z) in cases {
        let tz = outer_map(&body, &z).unwrap();
        assert_vec_close(&outer_map_inverse(&body, &tz).unwrap(), &z, 1e-10);
    }
    let body = patched_r2();
    let x = body.boundary_project(&v(&[0.8, 0.6])).unwrap();
    let z = &x.x + x.f();
    let tz = outer_map(&body, &z).unwrap();
    assert_vec_close(&outer_map_inverse(&body, &tz).unwrap(), &z, 1e-8);
}

#[test]
fn disk_closed_forms() {
    let disk = ball(2);
    for r in [1.1, 2f64.sqrt(), 2.0, 10.0] {
        let z = v(&[r, 0.0]);
        let tz = outer_map(&disk, &z).unwrap();
        assert_close(tz.norm(), r, 1e-10);
        let angle = tz[1].atan2(tz[0]);
        assert_close(angle, 2.0 * (1.0 / r).acos(), 1e-9);
    }
}

#[test]
fn disk_orbits_close() {
    let disk = ball(2);
    let trace = iterate(&disk, &v(&[2.0, 0.0]), 3).unwrap();
    assert!(trace.failure.is_none());
    assert!((&trace.points[3] - &trace.points[0]).norm() <= 1e-8);
    assert!(periodicity_defect(&trace, 3).unwrap().defect <= 1e-8);

    let trace = iterate(&disk, &v(&[2f64.sqrt(), 0.0]), 4).unwrap();
    let report = periodicity_defect(&trace, 4).unwrap();
    assert!(report.defect <= 1e-8);
    assert!(report.symmetry_defect.unwrap() <= 1e-8);

    let l = Matrix::from_diagonal(&v(&[2.0, 0.5]));
    for (z, period) in [(v(&[2.0, 0.0]), 3), (v(&[2f64.sqrt(), 0.0]), 4)] {
        let trace = iterate(&ellipse(), &(&l * z), period).unwrap();
        assert!(periodicity_defect(&trace, period).unwrap().defect <= 1e-8);
    }

    let trace = iterate(&disk, &v(&[1.7, 0.3]), 12).unwrap();
    let stats = boundedness_stats(&trace);
    assert_close(stats.max_norm, stats.min_norm, 1e-10);
    assert_eq!(stats.steps, 12);
    assert!(periodicity_defect(&trace, 4).unwrap().defect > 0.1);
}

#[test]
fn disk_orbit_rotates_by_the_oracle_angle() {
    let z0 = v(&[3.0, 0.5]);
    let trace = iterate(&ball(2), &z0, 6).unwrap();
    let step = 2.0 * (1.0 / z0.norm()).acos();
    for (k, z) in trace.points.iter().enumerate() {
        assert_vec_close(z, &rotate(&z0, step * k as f64), 1e-9);
    }
}

#[test]
fn iterate_rejects_bad_start() {
    assert!(iterate(&ball(2), &v(&[0.5, 0.0]), 3).is_err());
    assert!(iterate(&ball(2), &v(&[2.0, 0.0]), 0).is_err());
}

#[test]
fn inverse_orbit_runs_backwards() {
    let z0 = v(&[2.5, -0.4]);
    let fw = iterate(&ellipse(), &z0, 5).unwrap();
    let bw = iterate_oriented(&ellipse(), &fw.points[5], 5, Orientation::Backward).unwrap();
    for k in 0..=5 {
        assert_vec_close(&bw.points[k], &fw.points[5 - k], 1e-9);
    }
}

#[test]
fn four_periodic_examples() {
    let disk = ball(2);
    let x = disk.boundary_project(&v(&[1.0, 0.0])).unwrap();
    let fam = four_periodic_family(&disk, &x).unwrap();
    let expected = [[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]];
    for (z, e) in fam.vertices.iter().zip(expected) {
        assert_vec_close(z, &v(&e), 1e-15);
    }
    let check = check_family(&disk, &fam).unwrap();
    assert!(check.edge_defect <= 1e-9);
    assert_close(check.area, 4.0, 1e-12);

    let e = ellipse();
    let x = e.boundary_project(&v(&[2.0, 0.0])).unwrap();
    let fam = four_periodic_family(&e, &x).unwrap();
    let expected = [[2.0, 0.5], [-2.0, 0.5], [-2.0, -0.5], [2.0, -0.5]];
    for (z, ex) in fam.vertices.iter().zip(expected) {
        assert_vec_close(z, &v(&ex), 1e-15);
    }
    let check = check_family(&e, &fam).unwrap();
    assert!(check.edge_defect <= 1e-9);
    assert_close(check.area, 4.0, 1e-12);

    let b4 = ball(4);
    let x = b4.boundary_project(&v(&[1.0, 0.0, 0.0, 0.0])).unwrap();
    let fam = four_periodic_family(&b4, &x).unwrap();
    assert_vec_close(&fam.vertices[0], &v(&[1.0, 0.0, 1.0, 0.0]), 1e-15);
    assert_vec_close(&fam.vertices[1], &v(&[-1.0, 0.0, 1.0, 0.0]), 1e-15);
    let check = check_family(&b4, &fam).unwrap();
    assert!(check.edge_defect <= 1e-9 && check.symmetry_defect == 0.0);
    assert_close(check.area, 4.0, 1e-12);
}

#[test]
fn four_periodic_family_is_gated() {
    let l4 = make_lp_ball(4.0, 4).unwrap();
    let x = l4.boundary_project(&v(&[1.0, 0.5, 0.2, -0.3])).unwrap();
    assert!(matches!(four_periodic_family(&l4, &x), Err(Error::NotSelfPolar { .. })));
}

#[test]
fn four_periodic_orbit_through_iteration() {
    let body = patched_r2();
    let x = body.boundary_project(&v(&[0.7, 0.7])).unwrap();
    let fam = four_periodic_family(&body, &x).unwrap();
    let trace = iterate(&body, &fam.vertices[0], 8).unwrap();
    let r = periodicity_defect(&trace, 4).unwrap();
    assert!(r.defect <= 1e-5);
    assert!(r.symmetry_defect.unwrap() <= 1e-5);
}

#[test]
fn symplectic_equivariance() {
    let mut r = osb_core::rng::seeded(44, 0);
    for x in [ball(4), lagrangian_l4()] {
        for _ in 0..3 {
            let l = random_symplectic(&mut r, 4, 0.6).unwrap();
            let lx = make_linear_image(&x, l.clone()).unwrap();
            assert!(lx.is_symplectic);
            for _ in 0..10 {
                let z = osb_core::rng::unit_vector(&mut r, 4) * 3.0;
                if x.gauge(&z).unwrap() <= 1.2 {
                    continue;
                }
                let lhs = outer_map(&lx.body, &(&l * &z)).unwrap();
                let rhs = &l * outer_map(&x, &z).unwrap();
                assert_vec_close(&lhs, &rhs, 1e-7);
            }
        }
    }
}

fn bodies() -> &'static [ConvexBody] {
    static B: OnceLock<Vec<ConvexBody>> = OnceLock::new();
    B.get_or_init(|| vec![ball(2), ellipse(), lagrangian_l4(), ellipse_sum(), patched_r2()])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn step_invariants(seed in any::<u64>(), scale in 1.05f64..6.0) {
        let mut r = osb_core::rng::seeded(seed, 9);
        for body in bodies() {
            let d = osb_core::rng::unit_vector(&mut r, body.dim());
            let z = &d * (scale / body.gauge(&d).unwrap());
            let sol = tangency_solve(body, &z, Orientation::Forward).unwrap();
            prop_assert!(sol.t > 0.0);
            prop_assert!(omega(&sol.x.x, &(&sol.x.x - &z)).unwrap() > 0.0);
            let tz = &sol.x.x * 2.0 - &z;
            let mid = (&z + &tz) / 2.0;
            prop_assert!((body.gauge(&mid).unwrap() - 1.0).abs() <= 1e-8);
            let back = outer_map_inverse(body, &tz).unwrap();
            prop_assert!((back - &z).norm() <= 1e-8, "{}", body.label());
        }
    }
}
