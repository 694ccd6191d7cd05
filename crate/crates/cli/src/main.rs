//! `knotdist`: certified distortion, closed-form bounds, oracle checks,
//! curve generators and the annealer from the command line.
//!
//! Exit codes: 0 success, 1 a verification suite failed, 2 parse or usage
//! error, 3 geometric precondition failure, 4 domain error.

mod manifest;

use clap::{Parser, Subcommand, ValueEnum};
use knotdist::bounds::{self, BoundEval, Branch};
use knotdist::distortion::{distortion_certified_with, distortion_profile, CertifyOptions};
use knotdist::geometry::{parse_curve, to_json, to_text};
use knotdist::knots::{self, ConnectSumSpec};
use knotdist::optimize::{minimize_distortion_with, AnnealConfig};
use knotdist::oracle::{self, Suite, VerifyReport};
use knotdist::{Error, PolyCurve};
use manifest::{manifest_path_for, Recorder};
use rayon::prelude::*;
use serde::Serialize;
use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "knotdist", version, about = "Distortion of polygonal space curves")]
struct Cli {
    /// Output format for results and generated curves.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Enclosure width for certified evaluations.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file, or output directory for `minimize`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Certified distortion enclosure of a curve file.
    Compute {
        curve: PathBuf,
        /// Write the profile `q ↦ δ(p0, q)` to this CSV file.
        #[arg(long)]
        profile: Option<PathBuf>,
        /// Arclength of `p0`; defaults to the first witness point.
        #[arg(long)]
        profile_at: Option<f64>,
        #[arg(long, default_value_t = 1000)]
        profile_samples: usize,
    },
    /// Evaluate a closed-form bound by name.
    Bounds {
        #[arg(value_enum)]
        name: BoundName,
        #[arg(allow_negative_numbers = true)]
        args: Vec<String>,
        /// Fixed number of decimals instead of the shortest round-trip form.
        #[arg(long)]
        precision: Option<usize>,
    },
    /// Run one oracle suite, or all of them.
    Verify {
        #[arg(default_value = "all")]
        suite: String,
        /// Grid density override; only valid with a single suite.
        #[arg(long)]
        density: Option<usize>,
    },
    /// Generate a curve.
    Gen {
        #[arg(value_enum)]
        kind: GenKind,
        #[arg(allow_negative_numbers = true)]
        params: Vec<String>,
        /// Number of tiles for `connect-sum`.
        #[arg(long, default_value_t = 1)]
        copies: usize,
        /// Scale ratio between consecutive tiles for `connect-sum`.
        #[arg(long, default_value_t = 0.1)]
        ratio: f64,
        /// Tile curve file for `connect-sum`; defaults to an open trefoil.
        #[arg(long)]
        tile: Option<PathBuf>,
        /// Vertex count of the default `connect-sum` tile.
        #[arg(long, default_value_t = 128)]
        tile_vertices: usize,
    },
    /// Anneal a curve towards lower distortion within its knot type.
    Minimize {
        curve: PathBuf,
        /// TOML file with annealer settings; flags override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        steps_per_epoch: Option<usize>,
        #[arg(long)]
        initial_temp: Option<f64>,
        #[arg(long)]
        cooling: Option<f64>,
        #[arg(long)]
        step_scale: Option<f64>,
        #[arg(long)]
        resample_every: Option<usize>,
        #[arg(long)]
        certify_every: Option<usize>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum BoundName {
    Theta0,
    M,
    M1,
    Quarter,
    Secant,
    Curvature,
    Ropelength,
    Constant,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum GenKind {
    Circle,
    TorusKnot,
    OpenTrefoil,
    ConnectSum,
    RandomArc,
}

#[derive(Debug)]
enum CliError {
    Core(Error),
    Usage(String),
    VerifyFailed,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(Error::Io(e))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(m) => f.write_str(m),
            CliError::VerifyFailed => f.write_str("verification failed"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::VerifyFailed => 1,
            CliError::Usage(_) => 2,
            CliError::Core(e) => match e {
                Error::Parse { .. } | Error::Json(_) | Error::Io(_) | Error::UnknownSuite(_) => 2,
                Error::NotSimple(_) | Error::InvalidCurve(_) | Error::CoincidentPoints => 3,
                Error::Domain(_)
                | Error::Infeasible(_)
                | Error::InvalidConfig(_)
                | Error::OutOfRange { .. } => 4,
            },
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(e.exit_code());
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if !matches!(e, CliError::VerifyFailed) {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}

/// `DISTORT_THREADS` caps the rayon pool.
fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("DISTORT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("DISTORT_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn run(cli: Cli) -> CliResult<()> {
    let g = Globals {
        format: cli.format,
        tol: cli.tol,
        seed: cli.seed,
        out: cli.out,
    };
    match cli.command {
        Command::Compute {
            curve,
            profile,
            profile_at,
            profile_samples,
        } => cmd_compute(&g, &curve, profile.as_deref(), profile_at, profile_samples),
        Command::Bounds {
            name,
            args,
            precision,
        } => cmd_bounds(&g, name, &args, precision),
        Command::Verify { suite, density } => cmd_verify(&g, &suite, density),
        Command::Gen {
            kind,
            params,
            copies,
            ratio,
            tile,
            tile_vertices,
        } => cmd_gen(&g, kind, &params, copies, ratio, tile.as_deref(), tile_vertices),
        Command::Minimize {
            curve,
            config,
            epochs,
            steps_per_epoch,
            initial_temp,
            cooling,
            step_scale,
            resample_every,
            certify_every,
        } => {
            let mut cfg = match &config {
                Some(path) => load_config(path)?,
                None => AnnealConfig::default(),
            };
            if let Some(v) = g.seed {
                cfg.seed = v;
            }
            if let Some(v) = g.tol {
                cfg.certify_tol = v;
            }
            if let Some(v) = epochs {
                cfg.epochs = v;
            }
            if let Some(v) = steps_per_epoch {
                cfg.steps_per_epoch = Some(v);
            }
            if let Some(v) = initial_temp {
                cfg.initial_temp = Some(v);
            }
            if let Some(v) = cooling {
                cfg.cooling = v;
            }
            if let Some(v) = step_scale {
                cfg.step_scale = v;
            }
            if let Some(v) = resample_every {
                cfg.resample_every = v;
            }
            if let Some(v) = certify_every {
                cfg.certify_every = v;
            }
            cmd_minimize(&g, &curve, config.as_deref(), &cfg)
        }
    }
}

struct Globals {
    format: Format,
    tol: Option<f64>,
    seed: Option<u64>,
    out: Option<PathBuf>,
}

fn read_curve(path: &Path) -> CliResult<PolyCurve> {
    let text = std::fs::read_to_string(path)?;
    Ok(parse_curve(&text)?)
}

/// JSON when asked for or when the target ends in `.json`.
fn serialize_curve(curve: &PolyCurve, format: Format, path: Option<&Path>) -> String {
    let json = format == Format::Json
        || path.is_some_and(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")));
    if json {
        to_json(curve)
    } else {
        to_text(curve)
    }
}

/// Shortest round-trip decimal; scientific notation for very small or large
/// magnitudes.
fn num(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

fn json_line<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(Error::Json)?;
    s.push('\n');
    Ok(s)
}

/// Prints `body`, and with `--out` also writes it there plus a manifest.
fn emit(g: &Globals, rec: Recorder, body: &str) -> CliResult<()> {
    print!("{body}");
    finish_with_out(g, rec, body.as_bytes())
}

fn finish_with_out(g: &Globals, mut rec: Recorder, bytes: &[u8]) -> CliResult<()> {
    if let Some(out) = &g.out {
        rec.write(out, bytes)?;
        rec.finish(&manifest_path_for(out))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// compute

#[derive(Serialize)]
struct ComputeOutput<'a> {
    curve: String,
    tol: f64,
    lower: f64,
    upper: f64,
    witness: [f64; 2],
    boxes_explored: usize,
    iterations: usize,
    converged: bool,
    result: &'a knotdist::distortion::DistortionResult,
}

fn cmd_compute(
    g: &Globals,
    path: &Path,
    profile: Option<&Path>,
    profile_at: Option<f64>,
    profile_samples: usize,
) -> CliResult<()> {
    let mut rec = Recorder::new("compute");
    rec.input(path);
    let tol = g.tol.unwrap_or(CertifyOptions::default().tol);
    rec.param("tol", tol);
    let curve = read_curve(path)?;
    let r = distortion_certified_with(&curve, &CertifyOptions::with_tol(tol))?;

    if let Some(csv_path) = profile {
        let p0 = profile_at.unwrap_or(r.witness.0.arclen);
        rec.param("profile_at", p0);
        rec.param("profile_samples", profile_samples);
        let rows = distortion_profile(&curve, p0, profile_samples)?;
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["q", "distortion"]).map_err(csv_err)?;
        for (q, d) in rows {
            w.serialize((q, d)).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Core(Error::Io(e.into_error())))?;
        rec.write(csv_path, &bytes)?;
    }

    let body = match g.format {
        Format::Json => json_line(&ComputeOutput {
            curve: path.display().to_string(),
            tol,
            lower: r.lower,
            upper: r.upper,
            witness: [r.witness.0.arclen, r.witness.1.arclen],
            boxes_explored: r.boxes_explored,
            iterations: r.iterations,
            converged: r.converged,
            result: &r,
        })?,
        Format::Text => {
            let mid = 0.5 * (r.lower + r.upper);
            let half = 0.5 * (r.upper - r.lower);
            format!(
                "distortion {} ± {}\nlower {}\nupper {}\nwitness {} {}\nboxes {}\niterations {}\nconverged {}\n",
                num(mid),
                num(half),
                num(r.lower),
                num(r.upper),
                num(r.witness.0.arclen),
                num(r.witness.1.arclen),
                r.boxes_explored,
                r.iterations,
                r.converged
            )
        }
    };
    if !r.converged {
        eprintln!("warning: box budget exhausted before reaching tol {tol}");
    }
    if let (Some(csv_path), None) = (profile, &g.out) {
        // The profile is an output file, so the run still gets a manifest.
        print!("{body}");
        rec.finish(&manifest_path_for(csv_path))?;
        return Ok(());
    }
    emit(g, rec, &body)
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Core(Error::Io(std::io::Error::other(e)))
}

// ---------------------------------------------------------------------------
// bounds

fn parse_f64(name: &str, raw: &str) -> CliResult<f64> {
    raw.trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("{name}: `{raw}` is not a number")))
}

fn expect_args(name: &str, args: &[String], names: &[&str]) -> CliResult<Vec<f64>> {
    if args.len() != names.len() {
        return Err(CliError::Usage(format!(
            "bounds {name} takes {} argument(s): {}",
            names.len(),
            names.join(" ")
        )));
    }
    args.iter().zip(names).map(|(a, n)| parse_f64(n, a)).collect()
}

fn direct(value: knotdist::Result<f64>) -> CliResult<BoundEval> {
    Ok(BoundEval {
        value: value?,
        branch: Branch::Direct,
    })
}

fn evaluate_bound(name: BoundName, args: &[String]) -> CliResult<BoundEval> {
    match name {
        BoundName::Theta0 => {
            let a = expect_args("theta0", args, &["r", "s"])?;
            direct(bounds::theta0(a[0], a[1]))
        }
        BoundName::M => {
            let a = expect_args("m", args, &["r", "s", "theta"])?;
            Ok(bounds::m(a[0], a[1], a[2])?)
        }
        BoundName::M1 => {
            let a = expect_args("m1", args, &["s", "theta"])?;
            Ok(bounds::m1(a[0], a[1])?)
        }
        BoundName::Quarter => {
            let a = expect_args("quarter", args, &["s"])?;
            direct(bounds::quarter_circle_bound(a[0]))
        }
        BoundName::Secant => {
            let a = expect_args("secant", args, &["c"])?;
            direct(bounds::secant_length_bound(a[0]))
        }
        BoundName::Curvature => {
            let a = expect_args("curvature", args, &["alpha"])?;
            direct(bounds::curvature_distortion_bound(a[0]))
        }
        BoundName::Ropelength => {
            let a = expect_args("ropelength", args, &["ropelength"])?;
            direct(bounds::ropelength_distortion_bound(a[0]))
        }
        BoundName::Constant => match args {
            [] => direct(Ok(bounds::knot_distortion_lower_constant())),
            [which] if which == "knot" => direct(Ok(bounds::knot_distortion_lower_constant())),
            [which] if which == "closed" => direct(Ok(bounds::closed_curve_lower_constant())),
            _ => Err(CliError::Usage("bounds constant takes an optional `knot` or `closed`".into())),
        },
    }
}

#[derive(Serialize)]
struct BoundsOutput<'a> {
    name: &'a str,
    args: &'a [String],
    value: f64,
    branch: Branch,
}

fn cmd_bounds(g: &Globals, name: BoundName, args: &[String], precision: Option<usize>) -> CliResult<()> {
    let label = name
        .to_possible_value()
        .map(|v| v.get_name().to_string())
        .unwrap_or_default();
    let mut rec = Recorder::new("bounds");
    rec.param("name", &label);
    rec.param("args", args.join(" "));
    let eval = evaluate_bound(name, args)?;
    let value = match precision {
        Some(p) => format!("{:.*}", p, eval.value),
        None => num(eval.value),
    };
    let body = match g.format {
        Format::Json => json_line(&BoundsOutput {
            name: &label,
            args,
            value: eval.value,
            branch: eval.branch,
        })?,
        Format::Text => format!("value {value}\nbranch {}\n", eval.branch),
    };
    emit(g, rec, &body)
}

// ---------------------------------------------------------------------------
// verify

fn format_report(r: &VerifyReport) -> String {
    let point: Vec<String> = r.worst_point.iter().map(|(k, v)| format!("{k}={}", num(*v))).collect();
    format!(
        "{} {} worst_margin={} at {} ({})\n",
        if r.passed { "PASS" } else { "FAIL" },
        r.suite,
        num(r.worst_margin),
        if point.is_empty() { "-".to_string() } else { point.join(" ") },
        r.grid_spec
    )
}

fn cmd_verify(g: &Globals, which: &str, density: Option<usize>) -> CliResult<()> {
    let mut rec = Recorder::new("verify");
    rec.param("suite", which);
    let reports: Vec<VerifyReport> = if which == "all" {
        if density.is_some() {
            return Err(CliError::Usage("--density needs a single suite".into()));
        }
        Suite::ALL
            .par_iter()
            .map(|&s| oracle::verify_suite(s, s.default_density()))
            .collect::<knotdist::Result<_>>()?
    } else {
        if let Some(d) = density {
            rec.param("density", d);
        }
        vec![oracle::verify_suite_named(which, density)?]
    };
    let body = match g.format {
        Format::Json => json_line(&reports)?,
        Format::Text => reports.iter().map(format_report).collect(),
    };
    emit(g, rec, &body)?;
    if reports.iter().all(|r| r.passed) {
        Ok(())
    } else {
        Err(CliError::VerifyFailed)
    }
}

// ---------------------------------------------------------------------------
// gen

fn parse_usize(name: &str, raw: &str) -> CliResult<usize> {
    raw.trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("{name}: `{raw}` is not a non-negative integer")))
}

fn expect_params<'a>(kind: &str, params: &'a [String], names: &[&str]) -> CliResult<&'a [String]> {
    if params.len() != names.len() {
        return Err(CliError::Usage(format!(
            "gen {kind} takes {} parameter(s): {}",
            names.len(),
            names.join(" ")
        )));
    }
    Ok(params)
}

#[allow(clippy::too_many_arguments)]
fn cmd_gen(
    g: &Globals,
    kind: GenKind,
    params: &[String],
    copies: usize,
    ratio: f64,
    tile: Option<&Path>,
    tile_vertices: usize,
) -> CliResult<()> {
    let mut rec = Recorder::new("gen");
    let curve = match kind {
        GenKind::Circle => {
            let p = expect_params("circle", params, &["n"])?;
            let n = parse_usize("n", &p[0])?;
            rec.param("kind", "circle");
            rec.param("n", n);
            knots::circle(n)?
        }
        GenKind::TorusKnot => {
            let p = expect_params("torus-knot", params, &["p", "q", "R", "r", "n"])?;
            let pp = parse_usize("p", &p[0])?;
            let qq = parse_usize("q", &p[1])?;
            let big_r = parse_f64("R", &p[2])?;
            let r = parse_f64("r", &p[3])?;
            let n = parse_usize("n", &p[4])?;
            let to_u32 = |name: &str, v: usize| {
                u32::try_from(v).map_err(|_| CliError::Core(Error::Domain(format!("{name} = {v} is too large"))))
            };
            rec.param("kind", "torus-knot");
            rec.param("p", pp);
            rec.param("q", qq);
            rec.param("R", big_r);
            rec.param("r", r);
            rec.param("n", n);
            knots::torus_knot(to_u32("p", pp)?, to_u32("q", qq)?, big_r, r, n)?
        }
        GenKind::OpenTrefoil => {
            let p = expect_params("open-trefoil", params, &["n"])?;
            let n = parse_usize("n", &p[0])?;
            rec.param("kind", "open-trefoil");
            rec.param("n", n);
            knots::open_trefoil(n)?
        }
        GenKind::ConnectSum => {
            expect_params("connect-sum", params, &[])?;
            rec.param("kind", "connect-sum");
            rec.param("copies", copies);
            rec.param("ratio", ratio);
            let spec = match tile {
                Some(path) => {
                    rec.input(path);
                    let tile = read_curve(path)?;
                    let default = ConnectSumSpec::with_trefoil(tile_vertices.max(8), copies, ratio)?;
                    let span = (tile.vertex(0) - tile.vertex(tile.len() - 1)).norm();
                    let default_span =
                        (default.tile.vertex(0) - default.tile.vertex(default.tile.len() - 1)).norm();
                    ConnectSumSpec {
                        tile,
                        copies,
                        scale_ratio: ratio,
                        loop_radius: default.loop_radius * span / default_span,
                    }
                }
                None => {
                    rec.param("tile_vertices", tile_vertices);
                    ConnectSumSpec::with_trefoil(tile_vertices, copies, ratio)?
                }
            };
            knots::connect_sum(&spec)?
        }
        GenKind::RandomArc => {
            let p = expect_params("random-arc", params, &["steps"])?;
            let steps = parse_usize("steps", &p[0])?;
            let seed = g.seed.unwrap_or(0);
            rec.param("kind", "random-arc");
            rec.param("steps", steps);
            rec.param("seed", seed);
            oracle::random_arc_outside_ball(seed, steps)?
        }
    };
    let body = serialize_curve(&curve, g.format, g.out.as_deref());
    match &g.out {
        Some(out) => {
            rec.write(out, body.as_bytes())?;
            rec.finish(&manifest_path_for(out))?;
            println!(
                "wrote {} ({} vertices, {})",
                out.display(),
                curve.len(),
                if curve.is_closed() { "closed" } else { "open" }
            );
        }
        None => print!("{body}"),
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// minimize

fn load_config(path: &Path) -> CliResult<AnnealConfig> {
    let text = std::fs::read_to_string(path)?;
    toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct TraceRow {
    epoch: usize,
    temperature: f64,
    objective: f64,
    acceptance_rate: f64,
    certified: Option<f64>,
    best_certified: f64,
    resampled: bool,
}

#[derive(Serialize)]
struct MinimizeSummary<'a> {
    config: &'a AnnealConfig,
    initial: &'a knotdist::distortion::DistortionResult,
    best: &'a knotdist::distortion::DistortionResult,
    accepted_moves: usize,
    proposed_moves: usize,
}

fn cmd_minimize(g: &Globals, path: &Path, config_path: Option<&Path>, cfg: &AnnealConfig) -> CliResult<()> {
    let Some(dir) = g.out.clone() else {
        return Err(CliError::Usage("minimize needs --out <dir>".into()));
    };
    let mut rec = Recorder::new("minimize");
    rec.input(path);
    if let Some(c) = config_path {
        rec.input(c);
    }
    let cfg_json = serde_json::to_value(cfg).map_err(Error::Json)?;
    if let serde_json::Value::Object(map) = cfg_json {
        for (k, v) in map {
            rec.param(&k, v);
        }
    }
    cfg.validate()?;
    let curve = read_curve(path)?;
    std::fs::create_dir_all(&dir)?;
    let ext = if g.format == Format::Json { "json" } else { "txt" };

    let mut checkpoint_err = None;
    let trace = minimize_distortion_with(&curve, cfg, |record, current, certified| {
        if certified.is_none() || checkpoint_err.is_some() {
            return;
        }
        let file = dir.join(format!("checkpoint-{:05}.{ext}", record.epoch + 1));
        if let Err(e) = rec.write(&file, serialize_curve(current, g.format, None).as_bytes()) {
            checkpoint_err = Some(e);
        }
    })?;
    if let Some(e) = checkpoint_err {
        return Err(e.into());
    }

    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &trace.records {
        w.serialize(TraceRow {
            epoch: r.epoch,
            temperature: r.temperature,
            objective: r.objective,
            acceptance_rate: r.acceptance_rate,
            certified: r.certified,
            best_certified: r.best_certified,
            resampled: r.resampled,
        })
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Core(Error::Io(e.into_error())))?;
    rec.write(&dir.join("trace.csv"), &bytes)?;

    let final_curve = serialize_curve(&trace.final_curve, g.format, None);
    rec.write(&dir.join(format!("final.{ext}")), final_curve.as_bytes())?;
    let summary = json_line(&MinimizeSummary {
        config: cfg,
        initial: &trace.initial,
        best: &trace.best,
        accepted_moves: trace.accepted_moves,
        proposed_moves: trace.proposed_moves,
    })?;
    rec.write(&dir.join("summary.json"), summary.as_bytes())?;
    rec.finish(&dir.join("manifest.json"))?;

    match g.format {
        Format::Json => print!("{summary}"),
        Format::Text => print!(
            "initial {} {}\nbest {} {}\naccepted {}/{}\nout {}\n",
            num(trace.initial.lower),
            num(trace.initial.upper),
            num(trace.best.lower),
            num(trace.best.upper),
            trace.accepted_moves,
            trace.proposed_moves,
            dir.display()
        ),
    }
    Ok(())
}
