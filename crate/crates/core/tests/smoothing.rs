use igs_core::geometry::{shapes, QuadRule};
use igs_core::sim::{exact_field, generate_data, grid_layout, FieldId};
use igs_core::smoothing::{
    apply_dirichlet_zero, assemble, gcv_value, predict, select_lambda, solve_fixed_lambda, solve_with, LambdaSearch,
    TraceMethod,
};
use igs_core::{Error, NurbsSurface, Observations, WeightedNet};
use nalgebra::DVector;

mod common;
use common::{dense_psi, planar_bilaplacian, rel_diff};

fn affine_plane(p: usize, spans: usize, a: [[f64; 2]; 3]) -> NurbsSurface {
    let sq = shapes::unit_square(p, spans).unwrap();
    let (n, m) = sq.dims();
    let pts = sq
        .net()
        .points()
        .iter()
        .map(|x| [0, 1, 2].map(|k| a[k][0] * x[0] + a[k][1] * x[1]))
        .collect();
    let net = WeightedNet::new(n, m, pts, vec![1.0; n * m]).unwrap();
    NurbsSurface::new(sq.kv_xi().clone(), sq.kv_eta().clone(), net).unwrap()
}

#[test]
fn flat_patch_penalty_matches_bilaplacian_oracle() {
    let shear = [[2.0, 0.5], [0.0, 1.5], [0.3, -0.2]];
    for (p, spans, a) in [
        (2, 3, [[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]),
        (3, 2, [[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]),
        (2, 4, shear),
        (4, 2, shear),
    ] {
        let s = affine_plane(p, spans, a);
        let obs = Observations::new(grid_layout(&s, (5, 5)), vec![0.0; 25]).unwrap();
        let quad = QuadRule::new(s.kv_xi(), s.kv_eta(), p + 1).unwrap();
        let sys = assemble(&s, &obs, &quad).unwrap();
        let oracle = planar_bilaplacian(s.kv_xi().knots(), p, s.kv_eta().knots(), p, a, 12);
        let rel = rel_diff(&sys.penalty, &oracle);
        assert!(rel < 1e-8, "p={p} spans={spans}: {rel:e}");

        let pts = s.net().points();
        let norm = sys.penalty.norm();
        for c in [
            DVector::from_element(s.num_basis(), 1.0),
            DVector::from_iterator(s.num_basis(), pts.iter().map(|x| x[0])),
            DVector::from_iterator(s.num_basis(), pts.iter().map(|x| x[1] - 3.0 * x[2])),
        ] {
            assert!((&sys.penalty * c).norm() < 1e-9 * norm);
        }
    }
}

fn small_problem() -> (NurbsSurface, igs_core::SmoothingSystem, Vec<f64>) {
    let s = shapes::sim2_patch();
    let pts = grid_layout(&s, (4, 3));
    let obs = generate_data(&s, |x| exact_field(FieldId::F2, x), &pts, 0.125, 7, 0).unwrap();
    let quad = QuadRule::new(s.kv_xi(), s.kv_eta(), 3).unwrap();
    let sys = assemble(&s, &obs, &quad).unwrap();
    let y = obs.values().to_vec();
    (s, sys, y)
}

#[test]
fn fit_matches_dense_formulas() {
    let (s, sys, y) = small_problem();
    assert_eq!((sys.num_obs(), sys.dim()), (12, 9));
    let psi = dense_psi(&s, &grid_layout(&s, (4, 3)));
    assert!(rel_diff(&sys.psi.to_dense(), &psi) < 1e-15);
    let yv = DVector::from_column_slice(&y);
    let n = 12.0;
    for lambda in [1e-6, 1e-3, 0.1, 10.0] {
        let fit = solve_fixed_lambda(&sys, &y, lambda).unwrap();
        let a = psi.transpose() * &psi + &sys.penalty * lambda;
        let a_inv = a.clone().lu().try_inverse().unwrap();
        let f = &a_inv * psi.transpose() * &yv;
        let smat = &psi * &a_inv * psi.transpose();
        let yhat = &smat * &yv;
        let tr = smat.trace();
        let rss = (&yhat - &yv).norm_squared();
        let gcv = n * rss / (n - tr).powi(2);
        let s2 = rss / (n - tr);
        let cov = &a_inv * psi.transpose() * &psi * &a_inv * s2;

        let close = |x: f64, y: f64| (x - y).abs() <= 1e-10 * y.abs().max(1e-300);
        let fv = DVector::from_column_slice(&fit.coefficients);
        assert!((&fv - &f).norm() <= 1e-10 * f.norm());
        assert!(rel_diff(&fit.smoothing_matrix(&sys), &smat) < 1e-10);
        assert!(close(fit.edf, tr));
        assert!(close(fit.gcv.unwrap(), gcv));
        assert!(close(gcv_value(&sys, &y, lambda).unwrap(), gcv));
        assert!(close(fit.sigma2.unwrap(), s2));
        assert!(rel_diff(&fit.coefficient_covariance().unwrap(), &cov) < 1e-10);

        let var = fit.fitted_variance(&sys).unwrap();
        let vs = &smat * smat.transpose() * s2;
        for i in 0..12 {
            assert!(close(var[i], vs[(i, i)]));
        }
        let s0 = [0.37, 0.81];
        let r = s.basis(s0, 0).unwrap();
        let mut psi0 = DVector::zeros(9);
        for (&k, v) in r.indices.iter().zip(&r.values) {
            psi0[k] = *v;
        }
        let pr = predict(&fit, &sys, &s, s0).unwrap();
        assert!(close(pr.value, psi0.dot(&f)));
        assert!(close(pr.variance.unwrap(), (psi0.transpose() * &cov * &psi0)[(0, 0)]));
    }
}

#[test]
fn smoothing_matrix_is_symmetric_and_shrinks() {
    let (_, sys, y) = small_problem();
    let fit = solve_fixed_lambda(&sys, &y, 0.05).unwrap();
    let smat = fit.smoothing_matrix(&sys);
    assert!(rel_diff(&smat, &smat.transpose()) < 1e-14);
    let eig = smat.symmetric_eigen().eigenvalues;
    assert!(eig.iter().all(|&e| e > -1e-10 && e < 1.0 + 1e-10));
}

#[test]
fn galerkin_residual_vanishes() {
    let (_, sys, y) = small_problem();
    for lambda in [0.0, 1e-4, 1.0] {
        let fit = solve_fixed_lambda(&sys, &y, lambda).unwrap();
        let r = fit.galerkin_residual(&sys, &y);
        let scale: f64 = sys.psi.t_mul_vec(&y).iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(r.iter().map(|v| v * v).sum::<f64>().sqrt() < 1e-10 * scale);
    }
}

#[test]
fn edf_endpoints_and_monotonicity() {
    let s = shapes::unit_square(2, 2).unwrap();
    let pts = grid_layout(&s, (10, 10));
    let obs = generate_data(&s, |x| (3.0 * x[0]).sin() + x[1], &pts, 0.1, 3, 0).unwrap();
    let quad = QuadRule::new(s.kv_xi(), s.kv_eta(), 3).unwrap();
    let sys = assemble(&s, &obs, &quad).unwrap();
    let y = obs.values();
    let fit0 = solve_fixed_lambda(&sys, y, 0.0).unwrap();
    assert!((fit0.edf - 16.0).abs() < 1e-6);
    let mut prev = f64::INFINITY;
    for k in 0..20 {
        let lambda = 10f64.powf(-8.0 + 12.0 * k as f64 / 19.0);
        let edf = solve_fixed_lambda(&sys, y, lambda).unwrap().edf;
        assert!(edf <= prev + 1e-9);
        prev = edf;
    }
    // null space of the planar Laplacian penalty keeps at least the affine
    // functions
    assert!(prev > 3.0 - 1e-6);
}

#[test]
fn hutchinson_trace_is_close_to_exact() {
    let (_, sys, y) = small_problem();
    let exact = solve_fixed_lambda(&sys, &y, 1e-3).unwrap().edf;
    let est = solve_with(&sys, &y, 1e-3, TraceMethod::Hutchinson { probes: 4000, seed: 5 })
        .unwrap()
        .edf;
    assert!((est - exact).abs() < 0.05 * exact, "{est} vs {exact}");
}

#[test]
fn gcv_search_beats_a_fine_grid() {
    let s = shapes::quarter_cylinder().k_refine_to(2, 7, 7).unwrap();
    let pts = grid_layout(&s, (10, 10));
    let obs = generate_data(&s, |x| exact_field(FieldId::F1, x), &pts, 0.125, 11, 0).unwrap();
    let quad = QuadRule::new(s.kv_xi(), s.kv_eta(), 3).unwrap();
    let sys = assemble(&s, &obs, &quad).unwrap();
    let sel = select_lambda(&sys, obs.values(), &LambdaSearch::default()).unwrap();
    let grid_min = (0..200)
        .map(|k| 10f64.powf(-12.0 + 18.0 * k as f64 / 199.0))
        .filter_map(|l| gcv_value(&sys, obs.values(), l).ok())
        .fold(f64::INFINITY, f64::min);
    assert!(!sel.flat);
    assert!(sel.gcv <= grid_min * (1.0 + 1e-6), "{} vs {}", sel.gcv, grid_min);
}

#[test]
fn gcv_is_undefined_when_interpolating() {
    let s = shapes::sim2_patch();
    let pts = grid_layout(&s, (3, 3));
    let obs = generate_data(&s, |x| x[0], &pts, 0.1, 1, 0).unwrap();
    let quad = QuadRule::new(s.kv_xi(), s.kv_eta(), 3).unwrap();
    let sys = assemble(&s, &obs, &quad).unwrap();
    let fit = solve_fixed_lambda(&sys, obs.values(), 0.0).unwrap();
    assert!(fit.gcv.is_none() && fit.sigma2.is_none());
    assert!(matches!(
        gcv_value(&sys, obs.values(), 0.0),
        Err(Error::GcvUndefined { .. })
    ));
}

#[test]
fn rank_deficient_design_without_penalty_is_singular() {
    let s = shapes::quarter_cylinder().k_refine_to(2, 6, 6).unwrap();
    let pts = grid_layout(&s, (3, 3));
    let obs = generate_data(&s, |x| x[2], &pts, 0.0, 1, 0).unwrap();
    let quad = QuadRule::new(s.kv_xi(), s.kv_eta(), 3).unwrap();
    let sys = assemble(&s, &obs, &quad).unwrap();
    assert!(matches!(
        solve_fixed_lambda(&sys, obs.values(), 0.0),
        Err(Error::Solve(_))
    ));
    assert!(solve_fixed_lambda(&sys, obs.values(), 1e-2).is_ok());
}

#[test]
fn dirichlet_fit_vanishes_on_the_boundary() {
    let s = shapes::quarter_cylinder().k_refine_to(2, 8, 8).unwrap();
    let pts = grid_layout(&s, (10, 10));
    let obs = generate_data(&s, |x| exact_field(FieldId::F1, x), &pts, 0.1, 2, 0).unwrap();
    let quad = QuadRule::new(s.kv_xi(), s.kv_eta(), 3).unwrap();
    let sys = apply_dirichlet_zero(&assemble(&s, &obs, &quad).unwrap());
    assert_eq!(sys.dim(), 36);
    let fit = solve_fixed_lambda(&sys, obs.values(), 1e-4).unwrap();
    for t in [0.0, 0.3, 0.77, 1.0] {
        for edge in [[t, 0.0], [t, 2.0], [0.0, 2.0 * t], [1.0, 2.0 * t]] {
            let pr = predict(&fit, &sys, &s, edge).unwrap();
            assert!(pr.value.abs() < 1e-12);
        }
    }
    let full = fit.full_coefficients(&sys);
    assert_eq!(full.len(), 64);
}

#[test]
fn coefficients_of_constant_data_reproduce_the_constant() {
    let s = shapes::sim2_patch().k_refine_to(3, 6, 6).unwrap();
    let pts = grid_layout(&s, (10, 10));
    let obs = Observations::new(pts, vec![2.5; 100]).unwrap();
    let quad = QuadRule::new(s.kv_xi(), s.kv_eta(), 4).unwrap();
    let sys = assemble(&s, &obs, &quad).unwrap();
    let fit = solve_fixed_lambda(&sys, obs.values(), 1.0).unwrap();
    assert!(fit.coefficients.iter().all(|c| (c - 2.5).abs() < 1e-8));
    assert!(fit.residual_sq < 1e-20);
}

#[test]
fn lambda_search_on_pure_noise_and_noise_free_data() {
    let s = shapes::quarter_cylinder().k_refine_to(2, 9, 9).unwrap();
    let pts = grid_layout(&s, (10, 10));
    let quad = QuadRule::new(s.kv_xi(), s.kv_eta(), 3).unwrap();
    let search = LambdaSearch::default();
    // pure noise: GCV prefers heavy smoothing, often the null space of the
    // penalty (constants and z) at the top of the bracket
    for rep in 0..20 {
        let obs = generate_data(&s, |_| 0.0, &pts, 1.0, 42, rep).unwrap();
        let sys = assemble(&s, &obs, &quad).unwrap();
        let sel = select_lambda(&sys, obs.values(), &search).unwrap();
        assert!(!sel.flat && sel.lambda > 1e-3, "rep {rep}: {}", sel.lambda);
        assert!(sel.fit.edf < 30.0, "rep {rep}: {}", sel.fit.edf);
    }

    // a field of the space itself, sampled without noise
    let obs = generate_data(&s, |x| x[2] * x[2] - x[0], &pts, 0.0, 1, 0).unwrap();
    let sys = assemble(&s, &obs, &quad).unwrap();
    let sel = select_lambda(&sys, obs.values(), &search).unwrap();
    assert!(sel.lambda < 1e-9, "{}", sel.lambda);
}
