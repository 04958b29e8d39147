//! Built-in test problems and seeded Monte-Carlo replication studies.
//!
//! Noise comes from ChaCha8 seeded with the study seed; repetition `r` reads
//! stream `r` of that generator, so every repetition is reproducible on its
//! own and serial and parallel schedules give identical reports. Normal
//! variates use the ziggurat sampler of `rand_distr::StandardNormal`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::functionals::{mise, mse_on_lattice, parametric_lattice, FieldOnSurface};
use crate::geometry::{shapes, NurbsSurface, QuadRule, SurfaceMap};
use crate::smoothing::{
    assemble, select_lambda, solve_fixed_lambda, FitResult, LambdaSearch, Observations, SmoothingSystem,
};

/// Built-in geometries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeometryId {
    QuarterCylinder,
    Sim2Patch,
}

impl FromStr for GeometryId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quarter_cylinder" => Ok(GeometryId::QuarterCylinder),
            "sim2_patch" => Ok(GeometryId::Sim2Patch),
            other => Err(Error::InvalidInput(format!(
                "unknown geometry '{other}' (expected quarter_cylinder or sim2_patch)"
            ))),
        }
    }
}

impl fmt::Display for GeometryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GeometryId::QuarterCylinder => "quarter_cylinder",
            GeometryId::Sim2Patch => "sim2_patch",
        })
    }
}

pub fn builtin_geometry(id: GeometryId) -> NurbsSurface {
    match id {
        GeometryId::QuarterCylinder => shapes::quarter_cylinder(),
        GeometryId::Sim2Patch => shapes::sim2_patch(),
    }
}

/// Closed-form test fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldId {
    F1,
    F2,
}

/// Evaluates the test field at a physical point.
pub fn exact_field(id: FieldId, x: &[f64; 3]) -> f64 {
    let [x, y, z] = *x;
    match id {
        FieldId::F1 => {
            let h = z / 2.0 - 1.0;
            (2.5 * PI * (x * y * y - y * h * h + x * x * h) + PI / 3.0).sin()
        }
        FieldId::F2 => (2.0 * (x * (PI * y).sin() + (PI * x).cos() * y) - 1.0) * (1.25 * PI * z).cos(),
    }
}

/// The two replication studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// Quarter cylinder with field F1; error measured as lattice MSE.
    Sim1,
    /// Rational patch with field F2; error measured as MISE.
    Sim2,
}

impl Scenario {
    pub fn geometry(self) -> GeometryId {
        match self {
            Scenario::Sim1 => GeometryId::QuarterCylinder,
            Scenario::Sim2 => GeometryId::Sim2Patch,
        }
    }

    pub fn field(self) -> FieldId {
        match self {
            Scenario::Sim1 => FieldId::F1,
            Scenario::Sim2 => FieldId::F2,
        }
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sim1" => Ok(Scenario::Sim1),
            "sim2" => Ok(Scenario::Sim2),
            other => Err(Error::InvalidInput(format!(
                "unknown scenario '{other}' (expected sim1 or sim2)"
            ))),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::Sim1 => "sim1",
            Scenario::Sim2 => "sim2",
        })
    }
}

/// Cell-centred grid of `n1 x n2` parametric points: `(k - 1/2) / n` along
/// each direction, row-major.
pub fn grid_layout<M: SurfaceMap + ?Sized>(map: &M, dims: (usize, usize)) -> Vec<[f64; 2]> {
    let [[a, b], [c, d]] = map.domain();
    let mut out = Vec::with_capacity(dims.0 * dims.1);
    for i in 0..dims.0 {
        for j in 0..dims.1 {
            out.push([
                a + (b - a) * (i as f64 + 0.5) / dims.0 as f64,
                c + (d - c) * (j as f64 + 0.5) / dims.1 as f64,
            ]);
        }
    }
    out
}

/// Generator for standard normal noise on stream `stream` of `seed`.
pub fn noise_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn standard_normals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Observations `y_i = f(X(s_i)) + sigma z_i` at the given parametric
/// locations.
pub fn generate_data<F>(
    surface: &NurbsSurface,
    field: F,
    points: &[[f64; 2]],
    sigma: f64,
    seed: u64,
    stream: u64,
) -> Result<Observations>
where
    F: Fn(&[f64; 3]) -> f64,
{
    if !(sigma >= 0.0) {
        return Err(Error::InvalidInput(format!("noise level must be >= 0, got {sigma}")));
    }
    let mut rng = noise_rng(seed, stream);
    let z = standard_normals(&mut rng, points.len());
    let values = points
        .iter()
        .zip(z)
        .map(|(&s, z)| Ok(field(&surface.point(s)?) + sigma * z))
        .collect::<Result<Vec<f64>>>()?;
    Observations::new(points.to_vec(), values)
}

/// Smoothing-parameter policy of a study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaPolicy {
    Gcv(LambdaSearch),
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub scenario: Scenario,
    /// Data grid per parametric direction.
    pub grid: (usize, usize),
    pub sigma: f64,
    pub reps: usize,
    pub degree: usize,
    /// Basis functions per direction after k-refinement.
    pub basis: (usize, usize),
    pub seed: u64,
    pub lambda: LambdaPolicy,
    /// Gauss points per direction; `degree + 1` when `None`.
    pub quad_order: Option<usize>,
    /// Lattice for the MSE.
    pub mse_lattice: (usize, usize),
    /// Lattice for the empirical mean and variance fields.
    pub field_lattice: (usize, usize),
}

impl SimConfig {
    /// Desk-scale defaults: 10x10 data grid, sigma = 0.125; sim1 uses p = 2,
    /// 9x9 functions and 20 repetitions, sim2 uses p = 3, 10x10 functions and
    /// 10 repetitions.
    pub fn desk(scenario: Scenario) -> Self {
        let (degree, basis, reps) = match scenario {
            Scenario::Sim1 => (2, (9, 9), 20),
            Scenario::Sim2 => (3, (10, 10), 10),
        };
        SimConfig {
            scenario,
            grid: (10, 10),
            sigma: 0.125,
            reps,
            degree,
            basis,
            seed: 1,
            lambda: LambdaPolicy::Gcv(LambdaSearch::default()),
            quad_order: None,
            mse_lattice: (150, 200),
            field_lattice: (75, 100),
        }
    }

    /// Repetition counts of the original studies (100 and 50).
    pub fn full_scale(scenario: Scenario) -> Self {
        let mut c = Self::desk(scenario);
        c.reps = match scenario {
            Scenario::Sim1 => 100,
            Scenario::Sim2 => 50,
        };
        c
    }

    /// Square basis of `nh` functions; `nh` must be a perfect square.
    pub fn with_nh(mut self, nh: usize) -> Result<Self> {
        let k = (nh as f64).sqrt().round() as usize;
        if k * k != nh {
            return Err(Error::InvalidInput(format!("N^h = {nh} is not a perfect square")));
        }
        self.basis = (k, k);
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0) {
            return Err(Error::InvalidInput("sigma must be >= 0".into()));
        }
        if self.reps == 0 {
            return Err(Error::InvalidInput("at least one repetition is required".into()));
        }
        if self.grid.0 == 0 || self.grid.1 == 0 {
            return Err(Error::InvalidInput("data grid must be nonempty".into()));
        }
        Ok(())
    }
}

/// Outcome of one repetition.
#[derive(Debug, Clone, PartialEq)]
pub struct RepResult {
    pub rep: usize,
    pub lambda: f64,
    pub gcv: f64,
    pub edf: f64,
    pub cond_inf: f64,
    pub mse: f64,
    pub mise: f64,
    pub failure: Option<String>,
}

impl RepResult {
    /// Error metric of the scenario (MSE for sim1, MISE for sim2).
    pub fn error(&self, scenario: Scenario) -> f64 {
        match scenario {
            Scenario::Sim1 => self.mse,
            Scenario::Sim2 => self.mise,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Summary {
        let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        if n == 0 {
            return Summary {
                count: 0,
                mean: f64::NAN,
                median: f64::NAN,
                q25: f64::NAN,
                q75: f64::NAN,
                min: f64::NAN,
                max: f64::NAN,
            };
        }
        // linear interpolation between order statistics
        let q = |p: f64| {
            let h = p * (n - 1) as f64;
            let lo = h.floor() as usize;
            let hi = h.ceil() as usize;
            v[lo] + (h - lo as f64) * (v[hi] - v[lo])
        };
        Summary {
            count: n,
            mean: v.iter().sum::<f64>() / n as f64,
            median: q(0.5),
            q25: q(0.25),
            q75: q(0.75),
            min: v[0],
            max: v[n - 1],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub config: SimConfig,
    pub num_basis: usize,
    pub reps: Vec<RepResult>,
    pub error_summary: Summary,
    pub mean_cond: f64,
    pub lattice: Vec<[f64; 2]>,
    pub lattice_points: Vec<[f64; 3]>,
    pub exact: Vec<f64>,
    /// Empirical mean of the fitted fields over successful repetitions.
    pub mean_field: Vec<f64>,
    /// Empirical variance (divisor M) of the fitted fields.
    pub variance_field: Vec<f64>,
}

/// Refined estimation space of a study.
pub fn study_surface(cfg: &SimConfig) -> Result<NurbsSurface> {
    builtin_geometry(cfg.scenario.geometry()).k_refine_to(cfg.degree, cfg.basis.0, cfg.basis.1)
}

/// Fits one data vector according to the policy.
pub fn fit_with_policy(sys: &SmoothingSystem, y: &[f64], policy: &LambdaPolicy) -> Result<FitResult> {
    match policy {
        LambdaPolicy::Gcv(search) => select_lambda(sys, y, search).map(|s| s.fit),
        LambdaPolicy::Fixed(l) => solve_fixed_lambda(sys, y, *l),
    }
}

/// Runs a replication study. Data locations are fixed across repetitions;
/// each repetition draws fresh noise and selects its own `lambda`. Fit
/// failures are recorded per repetition.
pub fn run_simulation(cfg: &SimConfig) -> Result<SimReport> {
    cfg.validate()?;
    let surface = study_surface(cfg)?;
    let field_id = cfg.scenario.field();
    let exact = move |x: &[f64; 3]| exact_field(field_id, x);
    let points = grid_layout(&surface, cfg.grid);
    let clean = generate_data(&surface, exact, &points, 0.0, cfg.seed, 0)?;
    let order = cfg.quad_order.unwrap_or(cfg.degree + 1);
    let quad = QuadRule::new(surface.kv_xi(), surface.kv_eta(), order)?;
    let sys = assemble(&surface, &clean, &quad)?;
    let mise_quad = QuadRule::new(surface.kv_xi(), surface.kv_eta(), cfg.degree + 3)?;

    let lattice = parametric_lattice(&surface, cfg.field_lattice);
    let lattice_bases = lattice
        .iter()
        .map(|&s| surface.basis(s, 0))
        .collect::<Result<Vec<_>>>()?;
    let lattice_points: Vec<[f64; 3]> = lattice_bases
        .iter()
        .map(|r| surface.derivatives_from_basis(r).x)
        .collect();

    let outcomes: Vec<(RepResult, Option<Vec<f64>>)> = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = noise_rng(cfg.seed, rep as u64);
            let y: Vec<f64> = clean
                .values()
                .iter()
                .zip(standard_normals(&mut rng, points.len()))
                .map(|(f, z)| f + cfg.sigma * z)
                .collect();
            let attempt = || -> Result<(RepResult, Vec<f64>)> {
                let fit = fit_with_policy(&sys, &y, &cfg.lambda)?;
                let coef = fit.full_coefficients(&sys);
                let field = FieldOnSurface::Coefficients(&coef);
                let mse = mse_on_lattice(&surface, &field, &exact, cfg.mse_lattice)?;
                let mise = mise(&surface, &field, &exact, &mise_quad)?;
                let values = lattice_bases
                    .iter()
                    .map(|r| r.indices.iter().zip(&r.values).map(|(&i, v)| v * coef[i]).sum())
                    .collect();
                let rr = RepResult {
                    rep,
                    lambda: fit.lambda,
                    gcv: fit.gcv.unwrap_or(f64::NAN),
                    edf: fit.edf,
                    cond_inf: fit.cond_inf,
                    mse,
                    mise,
                    failure: None,
                };
                Ok((rr, values))
            };
            match attempt() {
                Ok((rr, v)) => (rr, Some(v)),
                Err(e) => (
                    RepResult {
                        rep,
                        lambda: f64::NAN,
                        gcv: f64::NAN,
                        edf: f64::NAN,
                        cond_inf: f64::NAN,
                        mse: f64::NAN,
                        mise: f64::NAN,
                        failure: Some(e.to_string()),
                    },
                    None,
                ),
            }
        })
        .collect();

    let fields: Vec<&Vec<f64>> = outcomes.iter().filter_map(|(_, f)| f.as_ref()).collect();
    let nl = lattice.len();
    let mut mean_field = vec![0.0; nl];
    let mut variance_field = vec![0.0; nl];
    if !fields.is_empty() {
        let m = fields.len() as f64;
        for f in &fields {
            for (acc, v) in mean_field.iter_mut().zip(f.iter()) {
                *acc += v;
            }
        }
        mean_field.iter_mut().for_each(|v| *v /= m);
        for f in &fields {
            for ((acc, v), mu) in variance_field.iter_mut().zip(f.iter()).zip(&mean_field) {
                *acc += (v - mu).powi(2);
            }
        }
        variance_field.iter_mut().for_each(|v| *v /= m);
    } else {
        mean_field.fill(f64::NAN);
        variance_field.fill(f64::NAN);
    }

    let reps: Vec<RepResult> = outcomes.into_iter().map(|(r, _)| r).collect();
    let errors: Vec<f64> = reps.iter().map(|r| r.error(cfg.scenario)).collect();
    let conds: Vec<f64> = reps.iter().map(|r| r.cond_inf).filter(|c| c.is_finite()).collect();
    let mean_cond = if conds.is_empty() {
        f64::NAN
    } else {
        conds.iter().sum::<f64>() / conds.len() as f64
    };
    let exact_vals = lattice_points.iter().map(exact).collect();
    Ok(SimReport {
        config: cfg.clone(),
        num_basis: surface.num_basis(),
        error_summary: Summary::of(&errors),
        reps,
        mean_cond,
        lattice,
        lattice_points,
        exact: exact_vals,
        mean_field,
        variance_field,
    })
}
