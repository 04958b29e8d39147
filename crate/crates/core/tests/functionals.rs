use std::f64::consts::PI;

use igs_core::functionals::{aero_force, area, force_comparison, integrate_scalar, mise, FieldOnSurface, FreeStream};
use igs_core::geometry::{shapes, QuadRule};

fn unit_q() -> FreeStream {
    FreeStream::new(2.0, 1.0, 101_325.0).unwrap()
}

#[test]
fn constant_pressure_on_quarter_cylinder() {
    let s = shapes::quarter_cylinder();
    let quad = QuadRule::new(s.kv_xi(), s.kv_eta(), 12).unwrap();
    let one = |_: &[f64; 3]| 1.0;
    let f = aero_force(&s, &FieldOnSurface::Physical(&one), &unit_q(), &quad, false).unwrap();
    let expect = [2.0, 2.0, 0.0];
    for d in 0..3 {
        assert!((f[d] - expect[d]).abs() < 1e-8, "{f:?}");
    }
    let flipped = aero_force(&s, &FieldOnSurface::Physical(&one), &unit_q(), &quad, true).unwrap();
    assert_eq!(flipped, f.map(|v| -v));

    // the same field as coefficients of the refined space
    let r = s.k_refine_to(3, 7, 6).unwrap();
    let c = vec![1.0; r.num_basis()];
    let quad = QuadRule::new(r.kv_xi(), r.kv_eta(), 10).unwrap();
    let g = aero_force(&r, &FieldOnSurface::Coefficients(&c), &unit_q(), &quad, false).unwrap();
    for d in 0..3 {
        assert!((g[d] - expect[d]).abs() < 1e-8, "{g:?}");
    }
    let (angle, rel) = force_comparison(&g, &f).unwrap();
    assert!(angle < 1e-6 && rel < 1e-6);
}

#[test]
fn full_cylinder_forces_cancel() {
    let s = shapes::full_cylinder(2.0);
    let quad = QuadRule::new(s.kv_xi(), s.kv_eta(), 4).unwrap();
    let one = |_: &[f64; 3]| 1.0;
    let f = aero_force(&s, &FieldOnSurface::Physical(&one), &unit_q(), &quad, false).unwrap();
    assert!(f.iter().all(|v| v.abs() < 1e-10), "{f:?}");
    // a pressure field linear in x gives a net force along x only
    let lin = |x: &[f64; 3]| x[0];
    let quad = QuadRule::new(s.kv_xi(), s.kv_eta(), 12).unwrap();
    let f = aero_force(&s, &FieldOnSurface::Physical(&lin), &unit_q(), &quad, false).unwrap();
    assert!(
        (f[0] - 2.0 * PI).abs() < 1e-8 && f[1].abs() < 1e-10 && f[2].abs() < 1e-10,
        "{f:?}"
    );
}

#[test]
fn area_converges_with_quadrature_order() {
    let s = shapes::quarter_cylinder();
    let mut prev = f64::INFINITY;
    for q in [2, 4, 6, 8, 10] {
        let quad = QuadRule::new(s.kv_xi(), s.kv_eta(), q).unwrap();
        let err = (area(&s, &quad).unwrap() - PI).abs();
        assert!(err <= prev);
        prev = err;
    }
    assert!(prev < 1e-9);
    // the patch has a pinched boundary point, so convergence is algebraic
    let s2 = shapes::sim2_patch();
    let a: Vec<f64> = [8, 16, 32]
        .iter()
        .map(|&q| area(&s2, &QuadRule::new(s2.kv_xi(), s2.kv_eta(), q).unwrap()).unwrap())
        .collect();
    assert!((a[1] - a[2]).abs() < 0.5 * (a[0] - a[1]).abs());
    assert!((a[1] - a[2]).abs() < 1e-3 * a[2]);
}

#[test]
fn integrals_of_closed_form_fields() {
    let s = shapes::quarter_cylinder();
    let quad = QuadRule::new(s.kv_xi(), s.kv_eta(), 12).unwrap();
    // int z dSigma = (pi/2) * 2 = pi; int x dSigma = 2
    let z = |x: &[f64; 3]| x[2];
    let x = |p: &[f64; 3]| p[0];
    assert!((integrate_scalar(&s, &FieldOnSurface::Physical(&z), &quad).unwrap() - PI).abs() < 1e-9);
    assert!((integrate_scalar(&s, &FieldOnSurface::Physical(&x), &quad).unwrap() - 2.0).abs() < 1e-9);
    // MISE of (f + 0.1) against f is 0.01
    let f = |p: &[f64; 3]| p[0] * p[2];
    let g = |p: &[f64; 3]| p[0] * p[2] + 0.1;
    assert!((mise(&s, &FieldOnSurface::Physical(&g), &f, &quad).unwrap() - 0.01).abs() < 1e-12);
}

#[test]
fn force_comparison_metrics() {
    let f = [3.0, -1.0, 0.5];
    assert_eq!(force_comparison(&f, &f).unwrap(), (0.0, 0.0));
    let (angle, rel) = force_comparison(&[0.0, 1.0, 0.0], &[1.0, 0.0, 0.0]).unwrap();
    assert!((angle - 90.0).abs() < 1e-12);
    assert!((rel - 100.0 * 2f64.sqrt()).abs() < 1e-12);
}
