//! Subcommand drivers. Each returns the text for standard output plus any
//! warnings; all files are written atomically.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use igs_core::functionals::{aero_force, force_comparison, parametric_lattice, FieldOnSurface, FreeStream};
use igs_core::geometry::{invert_point, InversionOptions, QuadRule, SurfaceMap};
use igs_core::sim::{builtin_geometry, run_simulation, GeometryId, LambdaPolicy, Scenario, SimConfig, SimReport};
use igs_core::smoothing::{
    apply_dirichlet_zero, assemble, predict, select_lambda, solve_fixed_lambda, BoundaryCondition, LambdaSearch,
};
use igs_core::{NurbsSurface, Observations};

use crate::files::{self, num, DataPoints};
use crate::CliError;

#[derive(Debug, Default)]
pub struct Outcome {
    pub stdout: String,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeometrySource {
    File(PathBuf),
    Builtin(GeometryId),
}

impl GeometrySource {
    pub fn load(&self) -> Result<NurbsSurface, CliError> {
        match self {
            GeometrySource::Builtin(id) => Ok(builtin_geometry(*id)),
            GeometrySource::File(p) => files::parse_geometry(&p.display().to_string(), &files::read_text(p)?),
        }
    }
}

fn output_path(prefix: &str, name: &str) -> PathBuf {
    PathBuf::from(format!("{prefix}.{name}"))
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_else(|| "undefined".into())
}

/// `igs geometry`: writes a built-in geometry file.
pub fn geometry(id: GeometryId, out: &Path) -> Result<Outcome, CliError> {
    let s = builtin_geometry(id);
    files::write_atomic(out, &files::geometry_to_string(&s))?;
    let (n, m) = s.dims();
    Ok(Outcome {
        stdout: format!("wrote {id} ({n} x {m} control points) to {}\n", out.display()),
        warnings: vec![],
    })
}

#[derive(Debug, Clone)]
pub struct FitOptions {
    pub geometry: GeometrySource,
    pub data: PathBuf,
    /// Target degree; at least 2 and at least the geometry degree by default.
    pub degree: Option<usize>,
    pub subdivisions: usize,
    /// Exact basis dimensions per direction, replacing `subdivisions`.
    pub basis: Option<(usize, usize)>,
    /// Fixed smoothing parameter; GCV selection when `None`.
    pub lambda: Option<f64>,
    pub boundary: BoundaryCondition,
    pub quad_order: Option<usize>,
    pub lattice: (usize, usize),
    pub out_prefix: String,
}

/// `igs fit`: penalised least-squares fit of a data file on a surface.
pub fn fit(opts: &FitOptions) -> Result<Outcome, CliError> {
    let base = opts.geometry.load()?;
    let (pu, pv) = base.degrees();
    let degree = opts.degree.unwrap_or(pu.max(pv).max(2));
    let surface = match opts.basis {
        Some((a, b)) => base.k_refine_to(degree, a, b)?,
        None => base.k_refine(degree, opts.subdivisions)?,
    };

    let data_name = opts.data.display().to_string();
    let data = files::parse_data(&data_name, &files::read_text(&opts.data)?)?;
    let mut warnings = Vec::new();
    let points: Vec<[f64; 2]> = match &data.points {
        DataPoints::Parametric(p) => {
            let [[a, b], [c, d]] = surface.domain();
            for (s, line) in p.iter().zip(&data.lines) {
                if s[0] < a || s[0] > b || s[1] < c || s[1] > d {
                    return Err(CliError::Input(format!(
                        "{data_name}:{line}: ({}, {}) is outside the parametric domain [{a}, {b}] x [{c}, {d}]",
                        s[0], s[1]
                    )));
                }
            }
            p.clone()
        }
        DataPoints::Physical(x) => {
            let inv_opts = InversionOptions::default();
            let scale = surface.scale();
            let mut out = Vec::with_capacity(x.len());
            for (p, line) in x.iter().zip(&data.lines) {
                let inv = invert_point(&surface, *p, None, &inv_opts)
                    .map_err(|e| CliError::Input(format!("{data_name}:{line}: {e}")))?;
                if !inv.on_surface(scale, &inv_opts) {
                    warnings.push(format!(
                        "{data_name}:{line}: point ({}, {}, {}) is {:.3e} from the surface; projected to s = ({:.6}, {:.6})",
                        p[0], p[1], p[2], inv.distance, inv.s[0], inv.s[1]
                    ));
                }
                out.push(inv.s);
            }
            out
        }
    };
    let inversion_warnings = warnings.len();
    let obs = Observations::new(points, data.values.clone())?;
    let (du, dv) = surface.degrees();
    let order = opts.quad_order.unwrap_or(du.max(dv) + 1);
    let quad = QuadRule::new(surface.kv_xi(), surface.kv_eta(), order)?;
    let mut sys = assemble(&surface, &obs, &quad)?;
    if opts.boundary == BoundaryCondition::DirichletZero {
        sys = apply_dirichlet_zero(&sys);
    }
    let y = obs.values();
    let (fit, policy, flat) = match opts.lambda {
        Some(l) => (solve_fixed_lambda(&sys, y, l)?, "fixed", None),
        None => {
            let sel = select_lambda(&sys, y, &LambdaSearch::default())?;
            (sel.fit, "gcv", Some(sel.flat))
        }
    };
    if flat == Some(true) {
        warnings.push("GCV is flat over the lambda bracket; the bracket midpoint was used".into());
    }

    let (n1, n2) = surface.dims();
    let mut report = String::new();
    let _ = writeln!(report, "# igs fit report");
    let _ = writeln!(report, "degrees = {du} {dv}");
    let _ = writeln!(report, "basis = {n1} {n2}");
    let _ = writeln!(report, "free_basis = {}", sys.dim());
    let _ = writeln!(report, "observations = {}", sys.num_obs());
    let _ = writeln!(report, "boundary = {}", bc_name(opts.boundary));
    let _ = writeln!(report, "quad_order = {order}");
    let _ = writeln!(report, "inversion_warnings = {inversion_warnings}");
    let _ = writeln!(report, "lambda_policy = {policy}");
    let _ = writeln!(report, "lambda = {}", num(fit.lambda));
    let _ = writeln!(report, "gcv = {}", opt_num(fit.gcv));
    let _ = writeln!(report, "edf = {}", num(fit.edf));
    let _ = writeln!(report, "sigma2 = {}", opt_num(fit.sigma2));
    let _ = writeln!(report, "cond_inf = {}", num(fit.cond_inf));
    let _ = writeln!(report, "residual_sq = {}", num(fit.residual_sq));

    let full = fit.full_coefficients(&sys);
    let mut coef = String::from("index,i,j,coefficient\n");
    for (k, c) in full.iter().enumerate() {
        let _ = writeln!(coef, "{k},{},{},{}", k / n2, k % n2, num(*c));
    }

    let var = fit.fitted_variance(&sys);
    let mut fitted = String::from("s1,s2,y,fitted,std_error\n");
    for (i, s) in obs.points().iter().enumerate() {
        let se = var.as_ref().map(|v| v[i].max(0.0).sqrt());
        let _ = writeln!(
            fitted,
            "{},{},{},{},{}",
            num(s[0]),
            num(s[1]),
            num(y[i]),
            num(fit.fitted[i]),
            opt_num(se)
        );
    }

    let mut lattice = String::from("s1,s2,x,y,z,value,variance\n");
    for s in parametric_lattice(&surface, opts.lattice) {
        let x = surface.point(s)?;
        let pr = predict(&fit, &sys, &surface, s)?;
        let _ = writeln!(
            lattice,
            "{},{},{},{},{},{},{}",
            num(s[0]),
            num(s[1]),
            num(x[0]),
            num(x[1]),
            num(x[2]),
            num(pr.value),
            opt_num(pr.variance)
        );
    }

    let p = &opts.out_prefix;
    files::write_atomic(&output_path(p, "report.txt"), &report)?;
    files::write_atomic(&output_path(p, "coefficients.csv"), &coef)?;
    files::write_atomic(&output_path(p, "fitted.csv"), &fitted)?;
    files::write_atomic(&output_path(p, "lattice.csv"), &lattice)?;
    files::write_atomic(&output_path(p, "geometry.txt"), &files::geometry_to_string(&surface))?;
    Ok(Outcome {
        stdout: report,
        warnings,
    })
}

fn bc_name(bc: BoundaryCondition) -> &'static str {
    match bc {
        BoundaryCondition::Natural => "natural",
        BoundaryCondition::DirichletZero => "dirichlet0",
    }
}

#[derive(Debug, Clone)]
pub struct SimulateOptions {
    pub scenario: Scenario,
    pub reps: Option<usize>,
    /// Total number of data points; must be a perfect square.
    pub n: Option<usize>,
    pub sigma: Option<f64>,
    pub degree: Option<usize>,
    pub nh: Option<usize>,
    pub seed: u64,
    pub full_scale: bool,
    pub lambda: Option<f64>,
    pub out_prefix: String,
}

fn square_side(n: usize, what: &str) -> Result<usize, CliError> {
    let k = (n as f64).sqrt().round() as usize;
    if k == 0 || k * k != n {
        return Err(CliError::Input(format!(
            "{what} = {n} must be a nonzero perfect square"
        )));
    }
    Ok(k)
}

pub fn simulation_config(opts: &SimulateOptions) -> Result<SimConfig, CliError> {
    let mut cfg = if opts.full_scale {
        SimConfig::full_scale(opts.scenario)
    } else {
        SimConfig::desk(opts.scenario)
    };
    if let Some(m) = opts.reps {
        cfg.reps = m;
    }
    if let Some(n) = opts.n {
        let k = square_side(n, "N")?;
        cfg.grid = (k, k);
    }
    if let Some(s) = opts.sigma {
        cfg.sigma = s;
    }
    if let Some(p) = opts.degree {
        cfg.degree = p;
    }
    if let Some(nh) = opts.nh {
        let k = square_side(nh, "N^h")?;
        cfg.basis = (k, k);
    }
    cfg.seed = opts.seed;
    if let Some(l) = opts.lambda {
        cfg.lambda = LambdaPolicy::Fixed(l);
    }
    Ok(cfg)
}

pub fn summary_text(r: &SimReport) -> String {
    let c = &r.config;
    let metric = match c.scenario {
        Scenario::Sim1 => "mse",
        Scenario::Sim2 => "mise",
    };
    let failures = r.reps.iter().filter(|x| x.failure.is_some()).count();
    let max_var = r.variance_field.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e = &r.error_summary;
    let mut out = String::new();
    let _ = writeln!(out, "# igs simulation summary");
    let _ = writeln!(out, "scenario = {}", c.scenario);
    let _ = writeln!(out, "geometry = {}", c.scenario.geometry());
    let _ = writeln!(out, "seed = {}", c.seed);
    let _ = writeln!(out, "repetitions = {}", c.reps);
    let _ = writeln!(out, "data_grid = {} {}", c.grid.0, c.grid.1);
    let _ = writeln!(out, "sigma = {}", num(c.sigma));
    let _ = writeln!(out, "degree = {}", c.degree);
    let _ = writeln!(out, "basis = {} {}", c.basis.0, c.basis.1);
    let _ = writeln!(out, "num_basis = {}", r.num_basis);
    match c.lambda {
        LambdaPolicy::Gcv(_) => {
            let _ = writeln!(out, "lambda_policy = gcv");
        }
        LambdaPolicy::Fixed(l) => {
            let _ = writeln!(out, "lambda_policy = fixed {}", num(l));
        }
    }
    let _ = writeln!(out, "failures = {failures}");
    let _ = writeln!(out, "error_metric = {metric}");
    for (k, v) in [
        ("mean", e.mean),
        ("median", e.median),
        ("q25", e.q25),
        ("q75", e.q75),
        ("min", e.min),
        ("max", e.max),
    ] {
        let _ = writeln!(out, "error_{k} = {}", num(v));
    }
    let _ = writeln!(out, "mean_cond_inf = {}", num(r.mean_cond));
    let _ = writeln!(out, "max_variance = {}", num(max_var));
    out
}

/// `igs simulate`: runs a replication study and writes its tables.
pub fn simulate(opts: &SimulateOptions) -> Result<Outcome, CliError> {
    let cfg = simulation_config(opts)?;
    let r = run_simulation(&cfg)?;

    let mut reps = String::from("rep,lambda,gcv,edf,cond_inf,mse,mise,failure\n");
    for x in &r.reps {
        let _ = writeln!(
            reps,
            "{},{},{},{},{},{},{},{}",
            x.rep,
            num(x.lambda),
            num(x.gcv),
            num(x.edf),
            num(x.cond_inf),
            num(x.mse),
            num(x.mise),
            x.failure.as_deref().unwrap_or("").replace([',', '\n'], ";")
        );
    }
    let mut fields = String::from("s1,s2,x,y,z,exact,mean,variance\n");
    for k in 0..r.lattice.len() {
        let (s, x) = (r.lattice[k], r.lattice_points[k]);
        let _ = writeln!(
            fields,
            "{},{},{},{},{},{},{},{}",
            num(s[0]),
            num(s[1]),
            num(x[0]),
            num(x[1]),
            num(x[2]),
            num(r.exact[k]),
            num(r.mean_field[k]),
            num(r.variance_field[k])
        );
    }
    let summary = summary_text(&r);
    let p = &opts.out_prefix;
    files::write_atomic(&output_path(p, "reps.csv"), &reps)?;
    files::write_atomic(&output_path(p, "fields.csv"), &fields)?;
    files::write_atomic(&output_path(p, "summary.txt"), &summary)?;
    let warnings = r
        .reps
        .iter()
        .filter_map(|x| x.failure.as_ref().map(|f| format!("repetition {} failed: {f}", x.rep)))
        .collect();
    Ok(Outcome {
        stdout: summary,
        warnings,
    })
}

#[derive(Debug, Clone)]
pub struct ForceOptions {
    pub geometry: GeometrySource,
    pub coefficients: Option<PathBuf>,
    pub constant: Option<f64>,
    pub rho: f64,
    pub speed: f64,
    pub pressure: f64,
    pub flip_normal: bool,
    pub reference: Option<[f64; 3]>,
    pub quad_order: usize,
    pub out: Option<PathBuf>,
}

/// `igs force`: pressure force of a `C_p` field.
pub fn force(opts: &ForceOptions) -> Result<Outcome, CliError> {
    let surface = opts.geometry.load()?;
    let fs = FreeStream::new(opts.rho, opts.speed, opts.pressure)?;
    let quad = QuadRule::new(surface.kv_xi(), surface.kv_eta(), opts.quad_order)?;
    let coef = match (&opts.coefficients, opts.constant) {
        (Some(p), None) => {
            let c = files::parse_coefficients(&p.display().to_string(), &files::read_text(p)?)?;
            if c.len() != surface.num_basis() {
                return Err(CliError::Input(format!(
                    "{}: {} coefficients for a geometry with {} basis functions",
                    p.display(),
                    c.len(),
                    surface.num_basis()
                )));
            }
            c
        }
        (None, Some(v)) => vec![v; surface.num_basis()],
        _ => {
            return Err(CliError::Usage(
                "exactly one of --coefficients and --constant is required".into(),
            ))
        }
    };
    let f = aero_force(
        &surface,
        &FieldOnSurface::Coefficients(&coef),
        &fs,
        &quad,
        opts.flip_normal,
    )?;
    let mut out = String::new();
    let _ = writeln!(out, "force = {} {} {}", num(f[0]), num(f[1]), num(f[2]));
    let _ = writeln!(
        out,
        "magnitude = {}",
        num((f[0] * f[0] + f[1] * f[1] + f[2] * f[2]).sqrt())
    );
    let _ = writeln!(out, "dynamic_pressure = {}", num(fs.dynamic_pressure()));
    if let Some(r) = opts.reference {
        let (angle, rel) = force_comparison(&f, &r)?;
        let _ = writeln!(out, "reference = {} {} {}", num(r[0]), num(r[1]), num(r[2]));
        let _ = writeln!(out, "angle_deg = {}", num(angle));
        let _ = writeln!(out, "relative_difference_percent = {}", num(rel));
    }
    if let Some(p) = &opts.out {
        files::write_atomic(p, &out)?;
    }
    Ok(Outcome {
        stdout: out,
        warnings: vec![],
    })
}
