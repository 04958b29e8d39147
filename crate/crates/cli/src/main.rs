use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use igs_cli::commands::{self, FitOptions, ForceOptions, GeometrySource, Outcome, SimulateOptions};
use igs_cli::{CliError, EXIT_USAGE};
use igs_core::sim::{GeometryId, Scenario};
use igs_core::smoothing::BoundaryCondition;

/// Isogeometric smoothing of scalar data on NURBS surfaces.
///
/// Exit codes: 0 success, 2 usage error, 3 invalid input, 4 numerical
/// failure. The worker thread count is read from IGS_THREADS unless
/// --threads is given; results do not depend on it.
#[derive(Parser)]
#[command(name = "igs", version)]
struct Cli {
    /// Worker threads (default: IGS_THREADS, else all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a built-in geometry to a file.
    Geometry {
        #[arg(value_enum)]
        id: GeometryArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a smooth field to scattered data on a surface.
    Fit(FitArgs),
    /// Run a seeded replication study.
    Simulate(SimulateArgs),
    /// Integrate the pressure force of a C_p field.
    Force(ForceArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GeometryArg {
    #[value(name = "quarter_cylinder", alias = "quarter-cylinder")]
    QuarterCylinder,
    #[value(name = "sim2_patch", alias = "sim2-patch")]
    Sim2Patch,
}

impl From<GeometryArg> for GeometryId {
    fn from(g: GeometryArg) -> Self {
        match g {
            GeometryArg::QuarterCylinder => GeometryId::QuarterCylinder,
            GeometryArg::Sim2Patch => GeometryId::Sim2Patch,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    Sim1,
    Sim2,
}

#[derive(Clone, Copy, ValueEnum)]
enum BcArg {
    Natural,
    Dirichlet0,
}

#[derive(Args)]
#[group(id = "geom", required = true, multiple = false)]
struct GeometryChoice {
    /// Geometry file.
    #[arg(long, group = "geom")]
    geometry: Option<PathBuf>,
    /// Built-in geometry instead of a file.
    #[arg(long, value_enum, group = "geom")]
    builtin: Option<GeometryArg>,
}

impl GeometryChoice {
    fn source(&self) -> GeometrySource {
        match (&self.geometry, self.builtin) {
            (Some(p), _) => GeometrySource::File(p.clone()),
            (None, Some(b)) => GeometrySource::Builtin(b.into()),
            (None, None) => unreachable!("clap enforces the group"),
        }
    }
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    geometry: GeometryChoice,
    /// CSV with header s1,s2,y (parametric) or x,y,z,value (physical).
    #[arg(long)]
    data: PathBuf,
    /// Target degree after k-refinement (default: max(geometry degree, 2)).
    #[arg(long)]
    p: Option<usize>,
    /// Knots inserted uniformly in every span after degree elevation.
    #[arg(long, default_value_t = 0, conflicts_with = "basis")]
    subdivisions: usize,
    /// Exact basis size per direction, e.g. 9x9.
    #[arg(long, value_parser = parse_pair)]
    basis: Option<(usize, usize)>,
    /// Fixed smoothing parameter.
    #[arg(long, conflicts_with = "gcv")]
    lambda: Option<f64>,
    /// Select the smoothing parameter by GCV (the default).
    #[arg(long)]
    gcv: bool,
    #[arg(long, value_enum, default_value = "natural")]
    bc: BcArg,
    /// Gauss points per direction and element (default: p + 1).
    #[arg(long)]
    quad_order: Option<usize>,
    /// Output lattice size, e.g. 50x50.
    #[arg(long, value_parser = parse_pair, default_value = "50x50")]
    lattice: (usize, usize),
    /// Output files are <prefix>.report.txt, .coefficients.csv, .fitted.csv,
    /// .lattice.csv and .geometry.txt.
    #[arg(long)]
    out_prefix: String,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(value_enum)]
    scenario: ScenarioArg,
    /// Repetitions (default 20 for sim1, 10 for sim2).
    #[arg(long)]
    m: Option<usize>,
    /// Number of data points on the square grid (default 100).
    #[arg(long)]
    n: Option<usize>,
    /// Noise standard deviation (default 0.125).
    #[arg(long)]
    sigma: Option<f64>,
    /// Degree (default 2 for sim1, 3 for sim2).
    #[arg(long)]
    p: Option<usize>,
    /// Number of basis functions, a perfect square (default 81 / 100).
    #[arg(long)]
    nh: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Use the original repetition counts (100 for sim1, 50 for sim2).
    #[arg(long)]
    full_scale: bool,
    /// Fixed smoothing parameter instead of GCV.
    #[arg(long)]
    lambda: Option<f64>,
    /// Output files are <prefix>.reps.csv, .fields.csv and .summary.txt.
    #[arg(long)]
    out_prefix: String,
}

#[derive(Args)]
struct ForceArgs {
    #[command(flatten)]
    geometry: GeometryChoice,
    /// Coefficient file written by `fit` (use its refined geometry).
    #[arg(long, conflicts_with = "constant", required_unless_present = "constant")]
    coefficients: Option<PathBuf>,
    /// Constant C_p everywhere.
    #[arg(long)]
    constant: Option<f64>,
    /// Free-stream density.
    #[arg(long)]
    rho: f64,
    /// Free-stream speed.
    #[arg(long)]
    v: f64,
    /// Free-stream static pressure (reported only).
    #[arg(long, default_value_t = 0.0)]
    pressure: f64,
    /// Use -(X_xi x X_eta) as the normal.
    #[arg(long)]
    flip_normal: bool,
    /// Reference force "fx,fy,fz" for the direction and magnitude comparison.
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
    r#ref: Option<[f64; 3]>,
    #[arg(long, default_value_t = 12)]
    quad_order: usize,
    /// Also write the result to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected AxB, got '{s}'"))?;
    let p = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("'{v}': {e}"));
    Ok((p(a)?, p(b)?))
}

fn parse_vec3(s: &str) -> Result<[f64; 3], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}")))
        .collect::<Result<_, _>>()?;
    <[f64; 3]>::try_from(v).map_err(|v| format!("expected three components, got {}", v.len()))
}

fn init_threads(flag: Option<usize>) -> Result<(), CliError> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var("IGS_THREADS") {
            Ok(v) => Some(
                v.trim()
                    .parse()
                    .map_err(|_| CliError::Usage(format!("IGS_THREADS='{v}' is not a count")))?,
            ),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    init_threads(cli.threads)?;
    match cli.command {
        Command::Geometry { id, out } => commands::geometry(id.into(), &out),
        Command::Fit(a) => commands::fit(&FitOptions {
            geometry: a.geometry.source(),
            data: a.data,
            degree: a.p,
            subdivisions: a.subdivisions,
            basis: a.basis,
            lambda: a.lambda,
            boundary: match a.bc {
                BcArg::Natural => BoundaryCondition::Natural,
                BcArg::Dirichlet0 => BoundaryCondition::DirichletZero,
            },
            quad_order: a.quad_order,
            lattice: a.lattice,
            out_prefix: a.out_prefix,
        }),
        Command::Simulate(a) => commands::simulate(&SimulateOptions {
            scenario: match a.scenario {
                ScenarioArg::Sim1 => Scenario::Sim1,
                ScenarioArg::Sim2 => Scenario::Sim2,
            },
            reps: a.m,
            n: a.n,
            sigma: a.sigma,
            degree: a.p,
            nh: a.nh,
            seed: a.seed,
            full_scale: a.full_scale,
            lambda: a.lambda,
            out_prefix: a.out_prefix,
        }),
        Command::Force(a) => commands::force(&ForceOptions {
            geometry: a.geometry.source(),
            coefficients: a.coefficients,
            constant: a.constant,
            rho: a.rho,
            speed: a.v,
            pressure: a.pressure,
            flip_normal: a.flip_normal,
            reference: a.r#ref,
            quad_order: a.quad_order,
            out: a.out,
        }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            print!("{}", out.stdout);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            let code = e.exit_code();
            debug_assert!(code != 0);
            ExitCode::from(u8::try_from(code).unwrap_or(EXIT_USAGE as u8))
        }
    }
}
