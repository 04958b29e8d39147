use igs_core::sim::{
    builtin_geometry, exact_field, noise_rng, run_simulation, standard_normals, FieldId, GeometryId, LambdaPolicy,
    Scenario, SimConfig,
};

fn quick(scenario: Scenario) -> SimConfig {
    let mut c = SimConfig::desk(scenario);
    c.reps = 4;
    c.mse_lattice = (30, 40);
    c.field_lattice = (12, 16);
    c
}

#[test]
fn reports_are_reproducible_and_schedule_independent() {
    let cfg = quick(Scenario::Sim1);
    let a = run_simulation(&cfg).unwrap();
    let b = run_simulation(&cfg).unwrap();
    assert_eq!(a, b);
    let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let c = serial.install(|| run_simulation(&cfg).unwrap());
    assert_eq!(a, c);
    assert_eq!(a.reps.len(), cfg.reps);

    let mut other = cfg.clone();
    other.seed = 2;
    assert_ne!(run_simulation(&other).unwrap().reps, a.reps);
}

#[test]
fn repetitions_share_locations_but_not_noise() {
    let r = run_simulation(&quick(Scenario::Sim2)).unwrap();
    let lambdas: Vec<f64> = r.reps.iter().map(|x| x.lambda).collect();
    assert!(lambdas.windows(2).any(|w| w[0] != w[1]));
    assert!(r.reps.iter().all(|x| x.failure.is_none()));
    assert!(r.variance_field.iter().all(|&v| v >= 0.0));
}

#[test]
fn noise_free_recovery_at_bracket_floor() {
    let mut c = SimConfig::desk(Scenario::Sim2).with_nh(100).unwrap();
    c.degree = 2;
    c.sigma = 0.0;
    c.reps = 1;
    c.lambda = LambdaPolicy::Fixed(1e-12);
    let r = run_simulation(&c).unwrap();
    assert!(r.reps[0].failure.is_none());
    assert!(r.reps[0].mse < 1e-3, "{:?}", r.reps[0]);
    assert!(r.reps[0].edf > 99.9);
}

#[test]
fn failed_repetitions_are_recorded() {
    let mut c = quick(Scenario::Sim1).with_nh(121).unwrap();
    c.lambda = LambdaPolicy::Fixed(0.0);
    let r = run_simulation(&c).unwrap();
    assert_eq!(r.reps.len(), 4);
    assert!(r.reps.iter().all(|x| x.failure.is_some() && x.mse.is_nan()));
    assert_eq!(r.error_summary.count, 0);
}

#[test]
fn invalid_configurations_are_rejected() {
    let mut c = quick(Scenario::Sim1);
    c.sigma = -0.1;
    assert!(run_simulation(&c).is_err());
    let mut c = quick(Scenario::Sim1);
    c.reps = 0;
    assert!(run_simulation(&c).is_err());
    let mut c = quick(Scenario::Sim2);
    c.basis = (2, 2);
    assert!(run_simulation(&c).is_err());
}

#[test]
fn standard_normal_stream_statistics() {
    let mut rng = noise_rng(2024, 0);
    let z = standard_normals(&mut rng, 1_000_000);
    let mean = z.iter().sum::<f64>() / z.len() as f64;
    let var = z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / z.len() as f64;
    assert!(mean.abs() < 4.0 / 1000.0);
    assert!((var - 1.0).abs() < 0.01);
}

#[test]
fn test_fields_are_bounded() {
    let qc = builtin_geometry(GeometryId::QuarterCylinder);
    let patch = builtin_geometry(GeometryId::Sim2Patch);
    let mut rng = noise_rng(5, 9);
    let u = standard_normals(&mut rng, 200_000);
    for k in 0..100_000 {
        let a = 0.5 + 0.5 * (u[2 * k]).tanh();
        let b = 0.5 + 0.5 * (u[2 * k + 1]).tanh();
        let x1 = qc.point([a, 2.0 * b]).unwrap();
        let x2 = patch.point([a, b]).unwrap();
        assert!(exact_field(FieldId::F1, &x1).abs() <= 1.0);
        assert!(exact_field(FieldId::F2, &x2).abs() <= 1.0 + 1e-12, "{x2:?}");
    }
}
