//! `symvol` command-line tool.

// Negated comparisons are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod kinds;

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::Vector2;
use serde_json::{json, Value};
use symvol::bodies::Body;
use symvol::exact::{ev_ellipse, ev_ellipsoid, ev_parallelogram, Density, ExactValue, MomentSpec};
use symvol::montecarlo::{compare_bodies, default_workers, estimate_moment, MCConfig};
use symvol::movements::{
    convexity_scan, squeeze_to_parallelogram, vertex_movement, Family, Functional,
    SpeedFunction,
};
use symvol::quadrature::{ev_symmetric_2d, ev_symmetric_ball_3d, QuadConfig};
use symvol::Error;

#[derive(Parser, Debug)]
#[command(name = "symvol", version, about = "Moments of normalized volumes of random symmetric polytopes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closed-form value of E V for a parallelogram, ellipse or 3-D ellipsoid.
    Exact(ExactArgs),
    /// Monte Carlo estimate of a moment, as one JSON line.
    Mc(McArgs),
    /// Quadrature of the reduction formula for a planar body or a 3-D ellipsoid.
    Quad(QuadArgs),
    /// CSV table of an N = 2 density.
    Density(DensityArgs),
    /// CSV convexity scan of area or a moment along a movement.
    Scan(ScanArgs),
    /// Ranks several bodies by a Monte Carlo moment.
    Compare(CompareArgs),
    /// Squeezes a polygon to a parallelogram through vertex movements.
    Squeeze(SqueezeArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ExactKind {
    Parallelogram,
    Ellipse,
    Ellipsoid,
}

#[derive(Args, Debug)]
struct ExactArgs {
    /// Body family of the closed form.
    #[arg(long, value_enum)]
    body: ExactKind,
    /// Number of random points.
    #[arg(long = "N")]
    n: usize,
    /// Quadrature tolerance (ellipse only).
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct BodyArgs {
    /// Body JSON file.
    #[arg(long)]
    body: Option<PathBuf>,
    /// Built-in body: square, cube, disc, ball, hexagon, octagon, diamond, octahedron.
    #[arg(long)]
    kind: Option<String>,
}

impl BodyArgs {
    fn resolve(&self) -> Result<(String, Body), Failure> {
        match (&self.body, &self.kind) {
            (Some(path), _) => load_body(path),
            (_, Some(kind)) => Ok((kind.clone(), kinds::builtin(kind)?)),
            _ => unreachable!("clap enforces one body source"),
        }
    }
}

#[derive(Args, Debug)]
struct MomentArgs {
    /// Number of random points.
    #[arg(long = "N")]
    n: usize,
    /// Moment order.
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    /// Symmetric hull conv(±x_i) (the default).
    #[arg(long, conflicts_with = "nonsymmetric")]
    symmetric: bool,
    /// Plain hull conv(x_i).
    #[arg(long)]
    nonsymmetric: bool,
}

impl MomentArgs {
    fn spec(&self) -> MomentSpec {
        MomentSpec::new(self.n, self.p, !self.nonsymmetric)
    }
}

#[derive(Args, Debug)]
struct SamplingArgs {
    /// Number of replications.
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    /// Replications per batch.
    #[arg(long)]
    batch: Option<u64>,
}

impl SamplingArgs {
    fn config(&self) -> MCConfig {
        let mut cfg = MCConfig::new(self.samples, self.seed).with_workers(self.workers.unwrap_or_else(default_workers));
        if let Some(b) = self.batch {
            cfg = cfg.with_batch(b);
        }
        cfg
    }
}

#[derive(Args, Debug)]
struct OutArgs {
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct McArgs {
    #[command(flatten)]
    body: BodyArgs,
    #[command(flatten)]
    moment: MomentArgs,
    #[command(flatten)]
    sampling: SamplingArgs,
    /// Add elapsed_seconds to the output (makes it non-reproducible).
    #[arg(long)]
    timing: bool,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct QuadArgs {
    #[command(flatten)]
    body: BodyArgs,
    #[command(flatten)]
    moment: MomentArgs,
    /// Quadrature tolerance.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DensityKind {
    /// Parallelogram.
    Vp2,
    /// Ellipse.
    Ve2,
}

impl From<DensityKind> for Density {
    fn from(k: DensityKind) -> Self {
        match k {
            DensityKind::Vp2 => Density::Vp2,
            DensityKind::Ve2 => Density::Ve2,
        }
    }
}

#[derive(Args, Debug)]
struct DensityArgs {
    #[arg(long, value_enum)]
    which: DensityKind,
    /// Equally spaced points across the support, ends included.
    #[arg(long, default_value_t = 200)]
    points: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MovementKind {
    /// Slide one half-vertex parallel to its neighbour chord.
    Vertex,
    /// Steiner movement; t = 1/2 is the symmetral, t = 1 the reflection.
    Steiner,
    /// Shear with β(x) = slope·x.
    Linear,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FunctionalKind {
    Area,
    Moment,
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[command(flatten)]
    body: BodyArgs,
    #[arg(long, value_enum)]
    movement: MovementKind,
    /// Grid as `n` (n points over the validity interval, [-1, 1] if unbounded) or `a:b:n`.
    #[arg(long, default_value = "21")]
    grid: String,
    #[arg(long, value_enum, default_value = "area")]
    functional: FunctionalKind,
    /// Half-vertex index for vertex movements.
    #[arg(long, default_value_t = 0)]
    vertex: usize,
    /// Movement direction `x,y` for steiner and linear movements.
    #[arg(long, default_value = "0,1", value_parser = parse_vector, allow_hyphen_values = true)]
    direction: [f64; 2],
    /// Shear slope for linear movements.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    slope: f64,
    /// Number of random points (moment functional).
    #[arg(long = "N", default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    #[arg(long)]
    nonsymmetric: bool,
    #[command(flatten)]
    sampling: SamplingArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct CompareArgs {
    /// Body JSON files.
    #[arg(long)]
    body: Vec<PathBuf>,
    /// Built-in bodies, comma separated.
    #[arg(long, value_delimiter = ',')]
    kind: Vec<String>,
    #[command(flatten)]
    moment: MomentArgs,
    #[command(flatten)]
    sampling: SamplingArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct SqueezeArgs {
    #[command(flatten)]
    body: BodyArgs,
    #[command(flatten)]
    moment: MomentArgs,
    #[command(flatten)]
    sampling: SamplingArgs,
    #[command(flatten)]
    out: OutArgs,
}

/// An error with its exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if matches!(e, Error::Unsupported(_)) { 2 } else { 1 };
        Self { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e).into()
    }
}

fn parse_vector(s: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').collect();
    match parts.as_slice() {
        [x, y] => Ok([
            x.trim().parse().map_err(|e| format!("{e}"))?,
            y.trim().parse().map_err(|e| format!("{e}"))?,
        ]),
        _ => Err("expected `x,y`".into()),
    }
}

fn load_body(path: &Path) -> Result<(String, Body), Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure { code: 1, message: format!("cannot read {}: {e}", path.display()) })?;
    let name = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
    Ok((name, Body::from_json(&text)?))
}

fn emit(out: &OutArgs, text: &str) -> Result<(), Failure> {
    match &out.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn json_line(value: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string(value).expect("results serialize to JSON");
    s.push('\n');
    s
}

fn cmd_exact(a: &ExactArgs) -> Result<String, Failure> {
    // Out-of-range N is an unsupported request, not a runtime failure.
    let as_usage = |e: Error| match e {
        Error::Domain(m) => Failure::usage(m),
        e => e.into(),
    };
    let value = match a.body {
        ExactKind::Parallelogram => ExactValue::rational("parallelogram", a.n, &ev_parallelogram(a.n).map_err(as_usage)?),
        ExactKind::Ellipsoid => ExactValue::rational("ellipsoid_3d", a.n, &ev_ellipsoid(a.n).map_err(as_usage)?),
        ExactKind::Ellipse => {
            let v = ev_ellipse(a.n, &QuadConfig::with_tol(a.tol)).map_err(as_usage)?;
            ExactValue::decimal("ellipse", a.n, v)
        }
    };
    Ok(json_line(&value))
}

fn cmd_mc(a: &McArgs) -> Result<String, Failure> {
    let (name, body) = a.body.resolve()?;
    let start = Instant::now();
    let est = estimate_moment(&body, &a.moment.spec(), &a.sampling.config())?;
    let mut value = json!({ "body": name });
    value.as_object_mut().unwrap().extend(match serde_json::to_value(&est).map_err(Error::from)? {
        Value::Object(m) => m,
        _ => unreachable!("estimates serialize to objects"),
    });
    if a.timing {
        value["elapsed_seconds"] = json!(start.elapsed().as_secs_f64());
    }
    Ok(json_line(&value))
}

fn cmd_quad(a: &QuadArgs) -> Result<String, Failure> {
    let (name, body) = a.body.resolve()?;
    let spec = a.moment.spec();
    if !spec.symmetric || spec.p != 1.0 {
        return Err(Error::Unsupported("quadrature covers the symmetric first moment (p = 1) only".into()).into());
    }
    spec.validate(body.dimension())?;
    let cfg = QuadConfig::with_tol(a.tol);
    let n = spec.n_points;
    let value = match (&body, body.dimension()) {
        (Body::Ellipsoid(_), 2) => ExactValue::decimal("ellipse", n, ev_ellipse(n, &cfg)?),
        (Body::Ellipsoid(_), 3) => ExactValue::decimal("reduction_ball_3d", n, ev_symmetric_ball_3d(n, &cfg)?),
        (_, 2) => ExactValue::decimal("reduction_2d", n, ev_symmetric_2d(&body.as_polygon()?, n, &cfg)?),
        _ => {
            return Err(Error::Unsupported(format!(
                "no reduction formula for {name} in dimension {}",
                body.dimension()
            ))
            .into())
        }
    };
    Ok(json_line(&value))
}

fn cmd_density(a: &DensityArgs) -> Result<String, Failure> {
    if a.points < 2 {
        return Err(Failure::usage("--points must be at least 2"));
    }
    let density = Density::from(a.which);
    let (lo, hi) = density.support();
    let mut out = String::from("t,density\n");
    for k in 0..a.points {
        let t = lo + (hi - lo) * k as f64 / (a.points - 1) as f64;
        out.push_str(&format!("{t},{}\n", density.pdf(t)?));
    }
    Ok(out)
}

fn parse_grid(spec: &str, validity: (f64, f64)) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::usage(format!("invalid --grid {spec:?}: expected `n` or `a:b:n`"));
    let parts: Vec<&str> = spec.split(':').collect();
    let (a, b, n) = match parts.as_slice() {
        [n] => {
            let (lo, hi) = validity;
            let (a, b) = if lo.is_finite() && hi.is_finite() { (lo, hi) } else { (-1.0, 1.0) };
            (a, b, n.parse::<usize>().map_err(|_| bad())?)
        }
        [a, b, n] => (
            a.parse::<f64>().map_err(|_| bad())?,
            b.parse::<f64>().map_err(|_| bad())?,
            n.parse::<usize>().map_err(|_| bad())?,
        ),
        _ => return Err(bad()),
    };
    if n < 3 || !(a < b) {
        return Err(Failure::usage("--grid needs at least 3 points and a < b"));
    }
    // Pin the last point to b so it never leaves the validity interval.
    Ok((0..n)
        .map(|k| if k == n - 1 { b } else { a + (b - a) * k as f64 / (n - 1) as f64 })
        .collect())
}

fn cmd_scan(a: &ScanArgs) -> Result<String, Failure> {
    let (_, body) = a.body.resolve()?;
    let polygon = body.as_polygon()?;
    let dir = Vector2::new(a.direction[0], a.direction[1]);
    let functional = match a.functional {
        FunctionalKind::Area => Functional::Area,
        FunctionalKind::Moment => Functional::Moment(MomentSpec::new(a.n, a.p, !a.nonsymmetric), a.sampling.config()),
    };
    let run = |family: &dyn ScanFamily| -> Result<String, Failure> {
        let grid = parse_grid(&a.grid, family.range())?;
        family.scan(&grid, &functional)
    };
    match a.movement {
        MovementKind::Vertex => run(&vertex_movement(&polygon, a.vertex)?.speed),
        MovementKind::Steiner => run(&SpeedFunction::steiner(polygon, dir)?),
        MovementKind::Linear => run(&SpeedFunction::linear(polygon, dir, a.slope)?),
    }
}

/// Object-safe view of a movement family for the scan command.
trait ScanFamily {
    fn range(&self) -> (f64, f64);
    fn scan(&self, grid: &[f64], functional: &Functional) -> Result<String, Failure>;
}

impl<F: Family> ScanFamily for F {
    fn range(&self) -> (f64, f64) {
        self.validity()
    }

    fn scan(&self, grid: &[f64], functional: &Functional) -> Result<String, Failure> {
        Ok(convexity_scan(self, grid, functional)?.to_csv())
    }
}

fn cmd_compare(a: &CompareArgs) -> Result<String, Failure> {
    let mut bodies = Vec::new();
    for path in &a.body {
        bodies.push(load_body(path)?);
    }
    for kind in &a.kind {
        bodies.push((kind.clone(), kinds::builtin(kind)?));
    }
    if bodies.len() < 2 {
        return Err(Failure::usage("compare needs at least two bodies"));
    }
    let cmp = compare_bodies(&bodies, &a.moment.spec(), &a.sampling.config())?;
    Ok(json_line(&cmp))
}

fn cmd_squeeze(a: &SqueezeArgs) -> Result<String, Failure> {
    let (_, body) = a.body.resolve()?;
    let spec = a.moment.spec();
    let trace = squeeze_to_parallelogram(&body.as_polygon()?, &spec, &a.sampling.config())?;
    let reference = ev_parallelogram(spec.n_points)?;
    let result: Vec<[f64; 2]> = trace.result.half_vertices().iter().map(|v| [v.x, v.y]).collect();
    Ok(json_line(&json!({
        "steps": trace.steps,
        "result_half_vertices": result,
        "parallelogram_exact": reference.to_string(),
        "parallelogram_decimal": reference.to_f64(),
    })))
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let (text, out) = match &cli.command {
        Command::Exact(a) => (cmd_exact(a)?, &a.out),
        Command::Mc(a) => (cmd_mc(a)?, &a.out),
        Command::Quad(a) => (cmd_quad(a)?, &a.out),
        Command::Density(a) => (cmd_density(a)?, &a.out),
        Command::Scan(a) => (cmd_scan(a)?, &a.out),
        Command::Compare(a) => (cmd_compare(a)?, &a.out),
        Command::Squeeze(a) => (cmd_squeeze(a)?, &a.out),
    };
    emit(out, &text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message.replace('\n', " "));
            ExitCode::from(f.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_specs() {
        assert_eq!(parse_grid("3", (0.0, 1.0)).unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_grid("5", (f64::NEG_INFINITY, f64::INFINITY)).unwrap()[0], -1.0);
        assert_eq!(parse_grid("-2:2:5", (0.0, 1.0)).unwrap(), vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        for bad in ["2", "1:0:5", "x", "1:2"] {
            assert_eq!(parse_grid(bad, (0.0, 1.0)).unwrap_err().code, 2);
        }
    }

    #[test]
    fn vectors() {
        assert_eq!(parse_vector("1, -2.5").unwrap(), [1.0, -2.5]);
        assert!(parse_vector("1").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
