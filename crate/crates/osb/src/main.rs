use std::f64::consts::TAU;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use osb_core::billiard::{boundedness_stats, check_family, four_periodic_family, iterate_oriented, Orientation};
use osb_core::hypersurface::{area_construction_2d, boundary_at_angle, hausdorff_2d, sample_y, signed_area, PlanarCurve};
use osb_core::measure::mahler_diagnostic;
use osb_core::{realize, BodySpec, ConvexBody, Error, Vector};
use serde::Serialize;

use osb::checks::Checker;
use osb::curve_io::{curve_csv, read_curve};
use osb::error::{EXIT_GATE, EXIT_NUMERIC};
use osb::json::{self, fmt_f64};
use osb::orbit_io::{orbit_csv, orbit_export};
use osb::output::emit;
use osb::verify::Level;
use osb::{load_spec, run_verify, spec_hash, OsbError};

const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Parser)]
#[command(name = "osb", version, about = "Symplectically self-polar bodies and their outer billiards")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct BodyArgs {
    /// Spec file, or inline JSON starting with `{`.
    #[arg(long)]
    spec: String,
    /// Absolute tolerance for identity checks.
    #[arg(long)]
    eq_tol: Option<f64>,
    /// Residual accepted by the tangency and support solvers.
    #[arg(long)]
    newton_tol: Option<f64>,
    #[arg(long)]
    newton_max_iter: Option<usize>,
    /// Relative finite-difference step.
    #[arg(long)]
    fd_step: Option<f64>,
}

impl BodyArgs {
    fn tolerance_overrides(&self, body: &ConvexBody) -> Option<osb_core::ToleranceConfig> {
        if self.eq_tol.is_none() && self.newton_tol.is_none() && self.newton_max_iter.is_none() && self.fd_step.is_none() {
            return None;
        }
        let mut t = *body.tolerances();
        t.eq_tol = self.eq_tol.unwrap_or(t.eq_tol);
        t.newton_tol = self.newton_tol.unwrap_or(t.newton_tol);
        t.newton_max_iter = self.newton_max_iter.unwrap_or(t.newton_max_iter);
        t.fd_step = self.fd_step.unwrap_or(t.fd_step);
        Some(t)
    }

    fn load(&self) -> Result<(BodySpec, ConvexBody, String), OsbError> {
        let spec = load_spec(&self.spec)?;
        let body = realize(&spec)?;
        let body = match self.tolerance_overrides(&body) {
            Some(t) => {
                t.validate()?;
                body.with_tolerances(t)
            }
            None => body,
        };
        let hash = spec_hash(&spec);
        Ok((spec, body, hash))
    }
}

#[derive(Debug, Args)]
struct Common {
    /// Seed for every random choice; defaults to 0, announced on stderr.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file, written atomically; stdout if omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

impl Common {
    fn seed(&self) -> u64 {
        self.seed.unwrap_or_else(|| {
            eprintln!("osb: using default seed {DEFAULT_SEED}");
            DEFAULT_SEED
        })
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum HCheck {
    Invariance,
    Star,
    TwoPoint,
    Transversality,
    Planarity,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LevelArg {
    Quick,
    Full,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Realize a spec; print gauge values, boundary samples or a summary.
    Body {
        #[command(flatten)]
        body: BodyArgs,
        /// Point at which to evaluate the gauge, comma-separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        eval: Option<Vec<f64>>,
        /// Boundary points as CSV; a uniform angle grid in the plane.
        #[arg(long)]
        boundary_samples: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Iterate the outer billiard map.
    Orbit {
        #[command(flatten)]
        body: BodyArgs,
        /// Comma-separated start point outside the body.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        start: Vec<f64>,
        #[arg(long)]
        steps: usize,
        /// Iterate the inverse map.
        #[arg(long)]
        inverse: bool,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[command(flatten)]
        common: Common,
    },
    /// The 4-periodic parallelogram through one boundary point.
    #[command(group(ArgGroup::new("point").required(true).args(["boundary_angle", "direction"])))]
    Periodic4 {
        #[command(flatten)]
        body: BodyArgs,
        /// Polar angle of the boundary point (planar bodies).
        #[arg(long, allow_hyphen_values = true)]
        boundary_angle: Option<f64>,
        /// Direction of the boundary point, comma-separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        direction: Option<Vec<f64>>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Checks on the invariant hypersurface Y, or Y itself as CSV.
    #[command(group(ArgGroup::new("what").required(true).args(["check", "emit_y"])))]
    Hypersurface {
        #[command(flatten)]
        body: BodyArgs,
        #[arg(long, value_enum)]
        check: Option<HCheck>,
        /// Write sampled points of Y instead of running a check.
        #[arg(long)]
        emit_y: bool,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Recover a planar boundary from its Y curve by the area construction.
    Recover {
        /// CSV with columns x,y; closure implicit.
        #[arg(long)]
        y_curve: String,
        /// True boundary for a Hausdorff comparison.
        #[arg(long)]
        truth: Option<String>,
        /// Where to write the JSON report; stderr if omitted.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Run the invariant suite; exit 0 iff every check passes.
    Verify {
        #[command(flatten)]
        body: BodyArgs,
        #[arg(long, value_enum, default_value = "quick")]
        level: LevelArg,
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo volume with the Mahler-type diagnostic.
    Volume {
        #[command(flatten)]
        body: BodyArgs,
        /// Number of Monte Carlo samples.
        #[arg(long, default_value_t = 1_000_000)]
        n: usize,
        #[command(flatten)]
        common: Common,
    },
}

fn vector(c: &[f64]) -> Vector {
    Vector::from_column_slice(c)
}

fn check_dim(body: &ConvexBody, v: &[f64]) -> Result<(), OsbError> {
    if v.len() != body.dim() {
        return Err(Error::DimensionMismatch {
            expected: body.dim(),
            found: v.len(),
        }
        .into());
    }
    Ok(())
}

fn cmd_body(
    body_args: &BodyArgs,
    eval: Option<&[f64]>,
    boundary_samples: Option<usize>,
    common: &Common,
) -> Result<i32, OsbError> {
    let (_, body, hash) = body_args.load()?;
    let out = common.output.as_deref();
    if let Some(p) = eval {
        check_dim(&body, p)?;
        emit(out, &format!("{}\n", fmt_f64(body.gauge(&vector(p))?)))?;
    } else if let Some(n) = boundary_samples {
        let dim = body.dim();
        let points = if dim == 2 {
            (0..n)
                .map(|k| boundary_at_angle(&body, TAU * k as f64 / n as f64))
                .collect::<Result<Vec<_>, _>>()?
        } else {
            let mut r = osb_core::rng::seeded(common.seed(), 0);
            (0..n)
                .map(|_| body.random_boundary_point(&mut r))
                .collect::<Result<Vec<_>, _>>()?
        };
        let header: Vec<String> = (1..=dim).map(|i| format!("x_{i}")).collect();
        let mut text = header.join(",") + "\n";
        for p in points {
            let row: Vec<String> = p.x.iter().map(|c| fmt_f64(*c)).collect();
            text.push_str(&row.join(","));
            text.push('\n');
        }
        emit(out, &text)?;
    } else {
        #[derive(Serialize)]
        struct Summary<'a> {
            body_hash: &'a str,
            label: &'a str,
            dim: usize,
            smoothness: String,
            numeric: bool,
            tolerances: osb_core::ToleranceConfig,
        }
        let s = Summary {
            body_hash: &hash,
            label: body.label(),
            dim: body.dim(),
            smoothness: format!("{}", body.smoothness()),
            numeric: body.is_numeric(),
            tolerances: *body.tolerances(),
        };
        emit(out, &json::to_string(&s))?;
    }
    Ok(0)
}

fn cmd_orbit(
    body_args: &BodyArgs,
    start: &[f64],
    steps: usize,
    inverse: bool,
    format: Format,
    common: &Common,
) -> Result<i32, OsbError> {
    let (_, body, hash) = body_args.load()?;
    check_dim(&body, start)?;
    let orientation = if inverse { Orientation::Backward } else { Orientation::Forward };
    let trace = iterate_oriented(&body, &vector(start), steps, orientation)?;
    let text = match format {
        Format::Csv => {
            // CSV has no room for metadata; the summary goes to stderr
            eprint!("{}", json::to_string(&boundedness_stats(&trace)));
            orbit_csv(&trace)
        }
        Format::Json => json::to_string(&orbit_export(&trace, &hash, *body.tolerances(), common.seed())),
    };
    emit(common.output.as_deref(), &text)?;
    if let Some(f) = &trace.failure {
        eprintln!("osb: orbit stopped early: {f}");
        return Ok(EXIT_NUMERIC);
    }
    Ok(0)
}

#[derive(Serialize)]
struct Periodic4Report {
    body_hash: String,
    x: Vec<f64>,
    f: Vec<f64>,
    vertices: Vec<Vec<f64>>,
    edge_defect: f64,
    edge_tolerance: f64,
    area: f64,
    symmetry_defect: f64,
    pass: bool,
}

#[derive(Serialize)]
struct GateReport {
    body_hash: String,
    check: &'static str,
    defect: f64,
    tolerance: f64,
    pass: bool,
}

fn cmd_periodic4(
    body_args: &BodyArgs,
    angle: Option<f64>,
    direction: Option<&[f64]>,
    output: Option<&std::path::Path>,
) -> Result<i32, OsbError> {
    let (_, body, hash) = body_args.load()?;
    let x = match (angle, direction) {
        (Some(theta), _) => {
            if body.dim() != 2 {
                return Err(OsbError::Input("--boundary-angle needs a planar body; use --direction".into()));
            }
            boundary_at_angle(&body, theta)?
        }
        (None, Some(d)) => {
            check_dim(&body, d)?;
            body.boundary_project(&vector(d))?
        }
        (None, None) => unreachable!("clap requires one of the two"),
    };
    let family = match four_periodic_family(&body, &x) {
        Ok(f) => f,
        Err(Error::NotSelfPolar { defect, tolerance }) => {
            let r = GateReport {
                body_hash: hash,
                check: "self_polarity",
                defect,
                tolerance,
                pass: false,
            };
            emit(output, &json::to_string(&r))?;
            return Ok(EXIT_GATE);
        }
        Err(e) => return Err(e.into()),
    };
    let c = check_family(&body, &family)?;
    let edge_tolerance = if body.is_numeric() { 1e-5 } else { 1e-7 };
    let pass = c.edge_defect <= edge_tolerance && (c.area - 4.0).abs() <= 1e-9;
    let r = Periodic4Report {
        body_hash: hash,
        x: x.x.as_slice().to_vec(),
        f: x.f().as_slice().to_vec(),
        vertices: family.vertices.iter().map(|z| z.as_slice().to_vec()).collect(),
        edge_defect: c.edge_defect,
        edge_tolerance,
        area: c.area,
        symmetry_defect: c.symmetry_defect,
        pass,
    };
    emit(output, &json::to_string(&r))?;
    Ok(if pass { 0 } else { EXIT_GATE })
}

fn cmd_hypersurface(
    body_args: &BodyArgs,
    check: Option<HCheck>,
    emit_y: bool,
    samples: usize,
    common: &Common,
) -> Result<i32, OsbError> {
    let (_, body, hash) = body_args.load()?;
    let seed = common.seed();
    let out = common.output.as_deref();
    if emit_y {
        let s = sample_y(&body, samples, seed)?;
        let text = match &s.curve {
            Some(c) => curve_csv(c),
            None => {
                let header: Vec<String> = (1..=body.dim()).map(|i| format!("y_{i}")).collect();
                let mut t = header.join(",") + "\n";
                for y in &s.ys {
                    let row: Vec<String> = y.iter().map(|c| fmt_f64(*c)).collect();
                    t.push_str(&row.join(","));
                    t.push('\n');
                }
                t
            }
        };
        emit(out, &text)?;
        return Ok(0);
    }
    let c = Checker::new(&body, &hash, seed);
    let report = match check.expect("clap requires --check or --emit-y") {
        HCheck::Invariance => c.invariance(samples),
        HCheck::Star => c.star_shape(samples, samples.min(100)),
        HCheck::TwoPoint => c.two_point(samples),
        HCheck::Transversality => c.transversality(samples),
        HCheck::Planarity => c.planarity(samples),
    };
    emit(out, &json::to_string(&report))?;
    Ok(if report.pass || report.advisory { 0 } else { EXIT_GATE })
}

#[derive(Serialize)]
struct RecoverReport {
    n_vertices: usize,
    y_area: f64,
    recovered_area: f64,
    hausdorff: Option<f64>,
}

fn cmd_recover(
    y_path: &str,
    truth: Option<&str>,
    report_path: Option<&std::path::Path>,
    output: Option<&std::path::Path>,
) -> Result<i32, OsbError> {
    let y = read_curve(y_path)?;
    let recovered = area_construction_2d(&y)?;
    let hausdorff = match truth {
        Some(p) => {
            let t: PlanarCurve = read_curve(p)?;
            Some(hausdorff_2d(&recovered, &t)?)
        }
        None => None,
    };
    emit(output, &curve_csv(&recovered))?;
    let r = RecoverReport {
        n_vertices: recovered.len(),
        y_area: signed_area(&y),
        recovered_area: signed_area(&recovered),
        hausdorff,
    };
    let text = json::to_string(&r);
    match report_path {
        Some(p) => osb::output::write_atomic(p, text.as_bytes())?,
        None => eprint!("{text}"),
    }
    Ok(0)
}

fn cmd_verify(body_args: &BodyArgs, level: LevelArg, common: &Common) -> Result<i32, OsbError> {
    let spec = load_spec(&body_args.spec)?;
    let level = match level {
        LevelArg::Quick => Level::Quick,
        LevelArg::Full => Level::Full,
    };
    // overrides are relative to the realized body's defaults
    let overrides = match realize(&spec) {
        Ok(body) => body_args.tolerance_overrides(&body),
        Err(_) => None,
    };
    let report = run_verify(&spec, level, common.seed(), overrides)?;
    emit(common.output.as_deref(), &json::to_string(&report))?;
    if let Some(c) = report.culprit() {
        eprintln!("osb: verify failed at `{}`", c.check);
        return Ok(EXIT_GATE);
    }
    Ok(0)
}

#[derive(Serialize)]
struct VolumeReport {
    body_hash: String,
    value: f64,
    stderr: f64,
    n: usize,
    seed: u64,
    method: osb_core::measure::VolumeMethod,
    mahler: MahlerPart,
}

#[derive(Serialize)]
struct MahlerPart {
    bound: f64,
    margin: f64,
    flagged: bool,
}

fn cmd_volume(body_args: &BodyArgs, n: usize, common: &Common) -> Result<i32, OsbError> {
    let (_, body, hash) = body_args.load()?;
    let seed = common.seed();
    let est = osb::parallel::mc_volume(&body, n, seed)?;
    let m = mahler_diagnostic(&body, est);
    if m.flagged {
        eprintln!("osb: volume below 2^n/n!; check the construction");
    }
    let r = VolumeReport {
        body_hash: hash,
        value: est.value,
        stderr: est.stderr,
        n: est.n_samples,
        seed,
        method: est.method,
        mahler: MahlerPart {
            bound: m.bound,
            margin: m.margin,
            flagged: m.flagged,
        },
    };
    emit(common.output.as_deref(), &json::to_string(&r))?;
    Ok(0)
}

fn run(cli: Cli) -> Result<i32, OsbError> {
    match &cli.command {
        Command::Body {
            body,
            eval,
            boundary_samples,
            common,
        } => cmd_body(body, eval.as_deref(), *boundary_samples, common),
        Command::Orbit {
            body,
            start,
            steps,
            inverse,
            format,
            common,
        } => cmd_orbit(body, start, *steps, *inverse, *format, common),
        Command::Periodic4 {
            body,
            boundary_angle,
            direction,
            output,
        } => cmd_periodic4(body, *boundary_angle, direction.as_deref(), output.as_deref()),
        Command::Hypersurface {
            body,
            check,
            emit_y,
            samples,
            common,
        } => cmd_hypersurface(body, *check, *emit_y, *samples, common),
        Command::Recover {
            y_curve,
            truth,
            report,
            output,
        } => cmd_recover(y_curve, truth.as_deref(), report.as_deref(), output.as_deref()),
        Command::Verify { body, level, common } => cmd_verify(body, *level, common),
        Command::Volume { body, n, common } => cmd_volume(body, *n, common),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("osb: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
