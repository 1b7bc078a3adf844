//! `fracstab` command-line front end.
//!
//! Every subcommand prints machine-readable output (JSON or CSV) on stdout,
//! or into `--out`. Failures print one JSON line on stderr and exit with
//! 1 (usage / parameter), 2 (numeric failure) or 3 (marginal verdict).

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fracstab::stability::{DEFAULT_GRID, DEFAULT_SAMPLES};
use fracstab::{
    a3_value, classify_on_curve, classify_trajectory, closed_form_bifurcations,
    count_enclosed_unstable, count_stable_components, real_interval, residual_with,
    sample_boundary, scan_region_with, simulate_with, solve_theta_star, sweep_bifurcations,
    winding_number, BoundaryCurve, Complex64, FracError, OrderPair, RegionCount, SweepOptions,
    SystemParams, TopologySignature, Verdict, Window,
};
use serde_json::{json, Map, Number, Value};

#[derive(Parser, Debug)]
#[command(
    name = "fracstab",
    version,
    about = "Stability and bifurcation analysis of two-term fractional difference systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate a trajectory through the sequence representation.
    Simulate(SimulateArgs),
    /// Maximum operator residual of a simulated trajectory.
    Verify(SimulateArgs),
    /// Sample the boundary curve γ(θ).
    Boundary(BoundaryArgs),
    /// Classify a multiplier b by its winding number.
    Classify(ClassifyArgs),
    /// Real stability interval (b_lo, b_hi).
    Interval(IntervalArgs),
    /// Stable / unstable map of a window of the b-plane.
    Regions(RegionsArgs),
    /// Closed-form bifurcation values, θ* and a₃.
    Bifurcations(OrderArgs),
    /// Topology sweep over a, downward from --from to --to.
    Sweep(SweepArgs),
}

#[derive(Args, Debug, Clone, Copy)]
struct OrderArgs {
    #[arg(long, allow_hyphen_values = true)]
    alpha: f64,
    #[arg(long, allow_hyphen_values = true)]
    beta: f64,
}

#[derive(Args, Debug)]
struct Output {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FormulationArg {
    Sequence,
    Caputo,
}

impl From<FormulationArg> for fracstab::Formulation {
    fn from(f: FormulationArg) -> Self {
        match f {
            FormulationArg::Sequence => fracstab::Formulation::Sequence,
            FormulationArg::Caputo => fracstab::Formulation::Caputo,
        }
    }
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    orders: OrderArgs,
    #[arg(long, allow_hyphen_values = true)]
    a: f64,
    /// Complex multiplier, "re,im" or "re".
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
    b: Complex64,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex, default_value = "0.1")]
    x0: Complex64,
    #[arg(long, default_value_t = 500)]
    n: usize,
    #[arg(long, value_enum, default_value_t = FormulationArg::Sequence)]
    formulation: FormulationArg,
    /// Include the operator residual in the summary.
    #[arg(long)]
    residual: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct BoundaryArgs {
    #[command(flatten)]
    orders: OrderArgs,
    #[arg(long, allow_hyphen_values = true)]
    a: f64,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    /// Uniform θ grid only, without adaptive refinement.
    #[arg(long)]
    no_refine: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ClassifyArgs {
    #[arg(long, allow_hyphen_values = true, required_unless_present = "curve")]
    alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true, required_unless_present = "curve")]
    beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true, required_unless_present = "curve")]
    a: Option<f64>,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
    b: Complex64,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    /// Classify against a "theta,re,im" CSV written by `boundary`.
    #[arg(long)]
    curve: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct IntervalArgs {
    #[command(flatten)]
    orders: OrderArgs,
    #[arg(long, allow_hyphen_values = true)]
    a: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RegionsArgs {
    #[command(flatten)]
    orders: OrderArgs,
    #[arg(long, allow_hyphen_values = true)]
    a: f64,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: usize,
    /// "re_min,re_max,im_min,im_max"; defaults to the curve's padded bounding box.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_window)]
    window: Option<Window>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    orders: OrderArgs,
    #[arg(long, allow_hyphen_values = true)]
    from: f64,
    #[arg(long, allow_hyphen_values = true)]
    to: f64,
    #[arg(long, default_value_t = 1e-3)]
    step: f64,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Count regions on an N×N grid instead of from the exact curve arrangement.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |p: &str| {
        p.parse::<f64>()
            .map_err(|e| format!("bad number {p:?}: {e}"))
    };
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(format!("expected \"re,im\" or \"re\", got {s:?}")),
    }
}

fn parse_window(s: &str) -> Result<Window, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|e| format!("bad number {p:?}: {e}"))
        })
        .collect::<Result<_, _>>()?;
    match v.as_slice() {
        [a, b, c, d] => Window::new(*a, *b, *c, *d).map_err(|e| e.to_string()),
        _ => Err(format!("expected re_min,re_max,im_min,im_max, got {s:?}")),
    }
}

/// Process failure: exit code plus diagnostic.
struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
}

impl From<FracError> for Failure {
    fn from(e: FracError) -> Self {
        let (code, kind) = match e {
            FracError::NoRoot(_) | FracError::NoConvergence { .. } => (2, "numeric"),
            FracError::MarginalProximity { .. } => (3, "marginal"),
            _ => (1, "parameter"),
        };
        Failure {
            code,
            kind,
            message: e.to_string(),
        }
    }
}

fn io_failure(e: std::io::Error) -> Failure {
    Failure {
        code: 1,
        kind: "io",
        message: e.to_string(),
    }
}

type CliResult<T> = Result<T, Failure>;

/// 17 significant digits, so every value round-trips exactly.
fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(
            fmt_f64(x)
                .parse::<Number>()
                .expect("formatted float is valid JSON"),
        )
    } else {
        Value::Null
    }
}

fn complex(z: Complex64) -> Value {
    json!({ "re": num(z.re), "im": num(z.im) })
}

fn signature(s: &TopologySignature) -> Value {
    json!({
        "n_self_intersections": s.n_self_intersections,
        "n_cusps": s.n_cusps,
        "n_stable_components": s.n_stable_components,
        "n_unstable_subregions": s.n_unstable_subregions,
    })
}

fn emit(text: String, out: Option<&PathBuf>) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(io_failure),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json(v: &Value, out: Option<&PathBuf>) -> CliResult<()> {
    emit(format!("{v}\n"), out)
}

fn orders(o: OrderArgs) -> CliResult<OrderPair> {
    Ok(OrderPair::new(o.alpha, o.beta)?)
}

fn run_simulate(args: &SimulateArgs, verify: bool) -> CliResult<()> {
    let params = SystemParams::new(orders(args.orders)?, args.a, args.b, args.x0)?;
    let formulation = args.formulation.into();
    let traj = simulate_with(params, args.n, formulation)?;
    let res = residual_with(&traj.values, &params, formulation);
    if verify {
        return emit_json(
            &json!({ "max_residual": num(res) }),
            args.output.out.as_ref(),
        );
    }
    let mut summary = Map::new();
    summary.insert("verdict".into(), classify_trajectory(&traj).as_str().into());
    summary.insert("max_abs".into(), num(traj.max_abs()));
    if args.residual {
        summary.insert("residual".into(), num(res));
    }
    let out = args.output.out.as_ref();
    match args.output.format {
        Format::Json => {
            let rows: Vec<Value> = traj
                .values
                .iter()
                .enumerate()
                .map(|(n, z)| json!({ "n": n, "re": num(z.re), "im": num(z.im) }))
                .collect();
            summary.insert("trajectory".into(), Value::Array(rows));
            emit_json(&Value::Object(summary), out)
        }
        Format::Csv => {
            let mut csv = String::from("n,re,im\n");
            for (n, z) in traj.values.iter().enumerate() {
                let _ = writeln!(csv, "{n},{},{}", fmt_f64(z.re), fmt_f64(z.im));
            }
            // The summary goes to stdout only when the CSV went to a file.
            emit(csv, out)?;
            if out.is_some() {
                emit_json(&Value::Object(summary), None)?;
            }
            Ok(())
        }
    }
}

fn run_boundary(args: &BoundaryArgs) -> CliResult<()> {
    let curve = sample_boundary(orders(args.orders)?, args.a, args.samples, !args.no_refine)?;
    let text = match args.format {
        Format::Csv => {
            let mut csv = String::from("theta,re,im\n");
            for (t, p) in curve.thetas.iter().zip(&curve.points) {
                let _ = writeln!(csv, "{},{},{}", fmt_f64(*t), fmt_f64(p.re), fmt_f64(p.im));
            }
            csv
        }
        Format::Json => {
            let rows: Vec<Value> = curve
                .thetas
                .iter()
                .zip(&curve.points)
                .map(|(t, p)| json!({ "theta": num(*t), "re": num(p.re), "im": num(p.im) }))
                .collect();
            format!("{}\n", Value::Array(rows))
        }
    };
    emit(text, args.out.as_ref())
}

fn read_curve(path: &PathBuf) -> CliResult<BoundaryCurve> {
    let text = std::fs::read_to_string(path).map_err(io_failure)?;
    let bad = |line: usize, msg: &str| Failure {
        code: 1,
        kind: "parameter",
        message: format!("{}:{line}: {msg}", path.display()),
    };
    let mut thetas = Vec::new();
    let mut points = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.starts_with("theta")) {
            continue;
        }
        let f: Vec<f64> = line
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| bad(i + 1, &e.to_string()))?;
        let [t, re, im] = f.as_slice() else {
            return Err(bad(i + 1, "expected theta,re,im"));
        };
        thetas.push(*t);
        points.push(Complex64::new(*re, *im));
    }
    Ok(BoundaryCurve::from_samples(thetas, points)?)
}

fn run_classify(args: &ClassifyArgs) -> CliResult<()> {
    let curve = match &args.curve {
        Some(path) => read_curve(path)?,
        None => {
            let o = OrderPair::new(
                args.alpha.unwrap_or(f64::NAN),
                args.beta.unwrap_or(f64::NAN),
            )?;
            let a = args.a.unwrap_or(f64::NAN);
            if a + 1.0 == 0.0 {
                return Err(FracError::SingularParameter { a }.into());
            }
            sample_boundary(o, a, args.samples, true)?
        }
    };
    let verdict = classify_on_curve(&curve, args.b);
    let winding = winding_number(&curve, args.b).ok();
    let opt = |x: Option<f64>| x.map(num).unwrap_or(Value::Null);
    let v = json!({
        "alpha": opt(args.alpha),
        "beta": opt(args.beta),
        "a": opt(args.a),
        "b": complex(args.b),
        "winding": winding,
        "verdict": verdict.as_str(),
    });
    emit_json(&v, args.out.as_ref())?;
    if verdict == Verdict::Marginal {
        return Err(Failure {
            code: 3,
            kind: "marginal",
            message: format!(
                "b = {} lies in the marginal band of the boundary curve",
                args.b
            ),
        });
    }
    Ok(())
}

fn run_interval(args: &IntervalArgs) -> CliResult<()> {
    let r = real_interval(orders(args.orders)?, args.a);
    emit_json(
        &json!({ "b_lo": num(r.b_lo), "b_hi": num(r.b_hi), "degenerate": r.degenerate }),
        args.out.as_ref(),
    )
}

fn run_regions(args: &RegionsArgs) -> CliResult<()> {
    let o = orders(args.orders)?;
    let report = scan_region_with(o, args.a, args.window, args.grid, args.grid, args.samples)?;
    let out = args.output.out.as_ref();
    match args.output.format {
        Format::Json => {
            let matrix: Vec<Value> = (0..report.rows)
                .map(|r| {
                    (0..report.cols)
                        .map(|c| report.verdict(r, c).as_char())
                        .collect::<String>()
                        .into()
                })
                .collect();
            let components: Vec<Value> = report
                .components
                .iter()
                .map(|c| json!({ "cells": c.cells, "row": c.row, "col": c.col, "representative": complex(c.representative) }))
                .collect();
            let w = report.window;
            let v = json!({
                "alpha": num(o.alpha()),
                "beta": num(o.beta()),
                "a": num(args.a),
                "window": { "re_min": num(w.re_min), "re_max": num(w.re_max), "im_min": num(w.im_min), "im_max": num(w.im_max) },
                "rows": report.rows,
                "cols": report.cols,
                "n_stable_components": count_stable_components(&report),
                "n_unstable_subregions": count_enclosed_unstable(&report),
                "components": components,
                "matrix": matrix,
            });
            emit_json(&v, out)
        }
        Format::Csv => {
            let mut csv = String::from("row,col,re,im,verdict,winding\n");
            for r in 0..report.rows {
                for c in 0..report.cols {
                    let z = report.node(r, c);
                    let w = report.windings[r * report.cols + c]
                        .map(|w| w.to_string())
                        .unwrap_or_default();
                    let _ = writeln!(
                        csv,
                        "{r},{c},{},{},{},{w}",
                        fmt_f64(z.re),
                        fmt_f64(z.im),
                        report.verdict(r, c).as_char()
                    );
                }
            }
            emit(csv, out)
        }
    }
}

fn run_bifurcations(args: OrderArgs) -> CliResult<()> {
    let o = orders(args)?;
    let closed = closed_form_bifurcations(o);
    let upper = 0.5 < o.beta() && o.alpha() < 1.0;
    let (theta, a3) = if upper {
        let ts = solve_theta_star(o)?;
        (
            json!({ "theta": num(ts.theta), "a3": num(ts.a3), "residual": num(ts.residual) }),
            num(a3_value(o)?),
        )
    } else {
        (Value::Null, Value::Null)
    };
    let v = json!({
        "alpha": num(o.alpha()),
        "beta": num(o.beta()),
        "a1": num(closed.a1),
        "a2": num(closed.a2),
        "a4": num(closed.a4),
        "theta_star": theta,
        "a3": a3,
    });
    emit_json(&v, None)
}

fn run_sweep(args: &SweepArgs) -> CliResult<()> {
    let o = orders(args.orders)?;
    let mut opts = SweepOptions::default();
    opts.step = args.step;
    opts.refine_tol = args.tol;
    opts.signature.regions = args.grid.map_or(RegionCount::Faces, RegionCount::Grid);
    opts.signature.samples = args.samples;
    let set = sweep_bifurcations(o, args.from, args.to, opts)?;
    let events: Vec<Value> = set
        .events
        .iter()
        .map(|e| {
            json!({
                "a": num(e.a),
                "width": num(e.width),
                "singular": e.singular,
                "before": signature(&e.before),
                "after": signature(&e.after),
            })
        })
        .collect();
    emit_json(&Value::Array(events), args.out.as_ref())
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("FRACSTAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| Failure {
        code: 1,
        kind: "usage",
        message: format!("FRACSTAB_THREADS must be a non-negative integer, got {raw:?}"),
    })?;
    if n > 0 {
        // Fails only if a pool already exists, which cannot happen this early.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    match &cli.command {
        Command::Simulate(a) => run_simulate(a, false),
        Command::Verify(a) => run_simulate(a, true),
        Command::Boundary(a) => run_boundary(a),
        Command::Classify(a) => run_classify(a),
        Command::Interval(a) => run_interval(a),
        Command::Regions(a) => run_regions(a),
        Command::Bifurcations(a) => run_bifurcations(*a),
        Command::Sweep(a) => run_sweep(a),
    }
}

fn diagnostic(kind: &str, message: &str) {
    let msg: String = message.split_whitespace().collect::<Vec<_>>().join(" ");
    eprintln!("{}", json!({ "error": kind, "message": msg }));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            diagnostic("usage", &e.to_string());
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            diagnostic(f.kind, &f.message);
            ExitCode::from(f.code)
        }
    }
}
