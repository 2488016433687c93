//! Command-line front end.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::warn;
use thiserror::Error;

use crate::io::{
    bundled_problem, emit_contour_grid, parse_problem, sweep_csv, IoError, LoadedProblem,
    PointBounds, ResultBundle, RunMetadata, BUNDLED_PROBLEMS,
};
use crate::prob::check_conditional_independence;
use crate::problem::ProblemSpec;
use crate::region::{
    corollary4_rates, default_lambda_grid, solve_for_distortion, subset_bounds, sweep_solutions,
    RegionError, SweepPoint,
};
use crate::solver::{RegionStatus, SolveResult, SolverConfig};
use crate::verify::{check_brute_force, check_sweep, check_wyner_ziv, Check};

/// Rate weights swept by `contour`, on top of the uniform weighting.
pub const CONTOUR_WEIGHTS: &[[f64; 2]] = &[[1.0, 1.0], [1.0, 2.0], [2.0, 1.0], [1.0, 4.0], [4.0, 1.0]];
pub const DEFAULT_BINS: usize = 20;
const DEFAULT_GRID_POINTS: usize = 24;
const VERIFY_GRID_POINTS: usize = 8;

#[derive(Debug, Parser)]
#[command(name = "remote-rd", version, about = "Rate-distortion regions for distributed remote source coding")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a grid of multipliers and write the traced curve.
    Sweep(SweepArgs),
    /// Bisect on the multiplier to reach a target distortion.
    TargetD(TargetArgs),
    /// Sweep and report the subset bound expressions at every point.
    Bounds(SweepArgs),
    /// Sweep several rate weightings and grid the (R_1, R_2) -> D cloud.
    Contour(ContourArgs),
    /// Check the solver against the reference oracles.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Csv,
    Json,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Toggle {
    On,
    Off,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Random restarts per multiplier.
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Relative Lagrangian tolerance for both the inner and the outer loop.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Iteration cap of each user's inner loop.
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Auxiliary alphabet sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub aux_sizes: Option<Vec<usize>>,
    /// Per-source rate weights, comma separated (experimental).
    #[arg(long, value_delimiter = ',')]
    pub per_source_lambda: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, default_value = ".")]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value = "both")]
    pub emit: Emit,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Problem file, or the name of a bundled problem.
    #[arg(long)]
    pub problem: PathBuf,
    /// `start:stop:count` (geometric, or linear when start is 0) or a comma separated list.
    #[arg(long)]
    pub lambda_grid: Option<String>,
    #[arg(long, value_enum, default_value = "on")]
    pub warm_start: Toggle,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TargetArgs {
    #[arg(long)]
    pub problem: PathBuf,
    #[arg(long)]
    pub target_d: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ContourArgs {
    #[command(flatten)]
    pub sweep: SweepArgs,
    /// Cells per rate axis.
    #[arg(long, default_value_t = DEFAULT_BINS)]
    pub bins: usize,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Problem to check; all bundled problems when omitted.
    #[arg(long)]
    pub problem: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] IoError),

    #[error(transparent)]
    Region(#[from] RegionError),

    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Region(RegionError::EmptyGrid | RegionError::InvalidLambda(_)) => 1,
            CliError::Io(_) | CliError::Region(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Parses `start:stop:count` or a comma separated list.
pub fn parse_lambda_grid(text: &str) -> Result<Vec<f64>> {
    let bad = || CliError::Usage(format!("invalid --lambda-grid {text:?}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [start, stop, count] => {
            let (a, b) = (num(start)?, num(stop)?);
            let n: usize = count.trim().parse().map_err(|_| bad())?;
            if n == 0 || !(a >= 0.0) || !(b >= a) {
                return Err(bad());
            }
            if n == 1 {
                return Ok(vec![a]);
            }
            let t = |k: usize| k as f64 / (n - 1) as f64;
            Ok(if a > 0.0 {
                (0..n).map(|k| (a.ln() + t(k) * (b.ln() - a.ln())).exp()).collect()
            } else {
                (0..n).map(|k| a + t(k) * (b - a)).collect()
            })
        }
        [list] => list.split(',').map(num).collect(),
        _ => Err(bad()),
    }
}

fn load(path: &Path, solver: &SolverArgs) -> Result<(ProblemSpec, SolverConfig)> {
    let LoadedProblem { spec, solver: overrides } = parse_problem(path)?;
    let spec = match &solver.aux_sizes {
        Some(aux) => spec.with_aux_sizes(aux.clone()).map_err(IoError::from)?,
        None => spec,
    };
    let mut config = SolverConfig::default();
    overrides.apply(&mut config);
    if let Some(v) = solver.restarts {
        config.restarts = v;
    }
    if let Some(v) = solver.seed {
        config.rng_seed = v;
    }
    if let Some(v) = solver.tol {
        config.inner_tol = v;
        config.outer_tol = v;
    }
    if let Some(v) = solver.max_iters {
        config.max_inner_iters = v;
    }
    if let Some(w) = &solver.per_source_lambda {
        config.rate_weights = Some(w.clone());
    }
    config
        .validate(spec.num_sources())
        .map_err(|e| CliError::Usage(e.to_string()))?;
    Ok((spec, config))
}

fn region_status(spec: &ProblemSpec) -> RegionStatus {
    match check_conditional_independence(spec.joint(), 1e-9) {
        Ok((true, _)) => RegionStatus::Exact,
        _ => RegionStatus::Bound,
    }
}

fn bundle_for(
    command: &str,
    spec: &ProblemSpec,
    config: &SolverConfig,
    grid: Vec<f64>,
    warm_start: bool,
    solved: Vec<(SweepPoint, Option<SolveResult>)>,
    started: Instant,
) -> ResultBundle {
    let mut bounds = Vec::new();
    for (p, r) in &solved {
        let Some(r) = r else { continue };
        match (subset_bounds(spec, &r.state), corollary4_rates(spec, &r.state)) {
            (Ok(report), Ok(c4)) => bounds.push(PointBounds {
                lambda: p.lambda,
                rate_weights: p.rate_weights.clone(),
                corollary4_rates: c4,
                report,
            }),
            (Err(e), _) | (_, Err(e)) => warn!("no bound report at lambda {}: {e}", p.lambda),
        }
    }
    let (points, states) = solved.into_iter().map(|(p, r)| (p, r.map(|r| r.state))).unzip();
    ResultBundle {
        metadata: RunMetadata {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            problem: spec.name.clone(),
            seed: config.rng_seed,
            config: config.clone(),
            lambda_grid: grid,
            warm_start,
            region_status: region_status(spec),
            wall_time_secs: started.elapsed().as_secs_f64(),
        },
        points,
        bounds,
        states: Some(states),
    }
}

fn write_file(dir: &Path, name: &str, text: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, text).map_err(|source| IoError::Write { path, source })?;
    Ok(())
}

fn write_outputs(out: &OutputArgs, bundle: &ResultBundle, m: usize) -> Result<()> {
    fs::create_dir_all(&out.output).map_err(|source| IoError::Write {
        path: out.output.clone(),
        source,
    })?;
    if matches!(out.emit, Emit::Csv | Emit::Both) {
        write_file(&out.output, "sweep.csv", &sweep_csv(&bundle.points, m)?)?;
    }
    if matches!(out.emit, Emit::Json | Emit::Both) {
        bundle.write(&out.output.join("bundle.json"))?;
    }
    Ok(())
}

fn require_convergence(points: &[SweepPoint]) -> Result<()> {
    if points.iter().any(|p| p.converged) {
        Ok(())
    } else {
        Err(CliError::Numerical(format!(
            "none of the {} multipliers converged",
            points.len()
        )))
    }
}

fn print_points(points: &[SweepPoint]) {
    for p in points {
        match &p.error {
            Some(e) => println!("lambda {:.6e}: failed: {e}", p.lambda),
            None => println!(
                "lambda {:.6e}: rates {:?}, D {:.6}, L {:.6}{}",
                p.lambda,
                p.rates,
                p.distortion,
                p.lagrangian,
                if p.converged { "" } else { " (not converged)" }
            ),
        }
    }
}

fn grid_of(args: &SweepArgs) -> Result<Vec<f64>> {
    match &args.lambda_grid {
        Some(g) => parse_lambda_grid(g),
        None => Ok(default_lambda_grid(DEFAULT_GRID_POINTS)),
    }
}

/// `sweep` and `bounds`: returns the bundle that was written.
pub fn run_sweep_command(args: &SweepArgs, command: &str) -> Result<ResultBundle> {
    let started = Instant::now();
    let (spec, config) = load(&args.problem, &args.solver)?;
    let grid = grid_of(args)?;
    let warm = args.warm_start == Toggle::On;
    let solved = sweep_solutions(&spec, &grid, &config, warm)?;
    let bundle = bundle_for(command, &spec, &config, grid, warm, solved, started);
    if bundle.metadata.region_status == RegionStatus::Bound {
        println!("note: sources are dependent given Y; results are an {}", RegionStatus::Bound);
    }
    print_points(&bundle.points);
    write_outputs(&args.out, &bundle, spec.num_sources())?;
    require_convergence(&bundle.points)?;
    Ok(bundle)
}

fn print_bounds(bundle: &ResultBundle) {
    for b in &bundle.bounds {
        println!("lambda {:.6e}:", b.lambda);
        for e in &b.report.entries {
            let subset: Vec<usize> = e.subset.iter().map(|i| i + 1).collect();
            println!(
                "  A = {subset:?}: inner {:.9}, outer {:.9}, sum rate {:.9}",
                e.inner, e.outer, e.sum_rate
            );
        }
    }
}

pub fn run_target_command(args: &TargetArgs) -> Result<ResultBundle> {
    let started = Instant::now();
    let (spec, config) = load(&args.problem, &args.solver)?;
    let point = solve_for_distortion(&spec, args.target_d, &config)?;
    let lambda = point.lambda;
    let bundle = bundle_for("target-d", &spec, &config, vec![lambda], false, vec![(point, None)], started);
    print_points(&bundle.points);
    write_outputs(&args.out, &bundle, spec.num_sources())?;
    require_convergence(&bundle.points)?;
    Ok(bundle)
}

pub fn run_contour_command(args: &ContourArgs) -> Result<ResultBundle> {
    let started = Instant::now();
    let sweep = &args.sweep;
    let (spec, config) = load(&sweep.problem, &sweep.solver)?;
    if spec.num_sources() != 2 {
        return Err(IoError::WrongSourceCount(spec.num_sources()).into());
    }
    let grid = grid_of(sweep)?;
    let warm = sweep.warm_start == Toggle::On;
    let weightings: Vec<Vec<f64>> = match &config.rate_weights {
        Some(w) => vec![w.clone()],
        None => CONTOUR_WEIGHTS.iter().map(|w| w.to_vec()).collect(),
    };
    let mut solved = Vec::new();
    for w in weightings {
        let cfg = SolverConfig {
            rate_weights: Some(w),
            ..config.clone()
        };
        solved.extend(sweep_solutions(&spec, &grid, &cfg, warm)?);
    }
    let bundle = bundle_for("contour", &spec, &config, grid, warm, solved, started);
    let contour = emit_contour_grid(&bundle, args.bins)?;
    write_outputs(&sweep.out, &bundle, spec.num_sources())?;
    write_file(&sweep.out.output, "contour.csv", &contour)?;
    println!(
        "{} points gridded into {}x{} cells",
        bundle.points.len(),
        args.bins,
        args.bins
    );
    require_convergence(&bundle.points)?;
    Ok(bundle)
}

/// Runs the oracle checks and returns them; the command fails if any fails.
pub fn run_verify_command(args: &VerifyArgs) -> Result<Vec<Check>> {
    let targets: Vec<PathBuf> = match &args.problem {
        Some(p) => vec![p.clone()],
        None => BUNDLED_PROBLEMS.iter().map(|(n, _)| PathBuf::from(n)).collect(),
    };
    let grid = default_lambda_grid(VERIFY_GRID_POINTS);
    let mut checks = Vec::new();
    for path in &targets {
        let (spec, config) = load(path, &args.solver)?;
        let solved = sweep_solutions(&spec, &grid, &config, true)?;
        checks.extend(check_sweep(&spec, &config, &solved));
        if spec.num_sources() == 1 {
            checks.push(check_brute_force(&spec, &[0.5, 1.0, 2.0], 0.02, &config));
        }
    }
    if args.problem.is_none() {
        if let Some(Ok(wz)) = bundled_problem("wz_binary_p30") {
            let wz_grid = parse_lambda_grid("0.1:100:20")?;
            checks.push(check_wyner_ziv(&wz.spec, 0.3, &wz_grid, &SolverConfig::default()));
        }
    }
    for c in &checks {
        println!("{c}");
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        return Err(CliError::Numerical(format!("{failed} of {} checks failed", checks.len())));
    }
    Ok(checks)
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Sweep(a) => run_sweep_command(a, "sweep").map(drop),
        Command::Bounds(a) => {
            let bundle = run_sweep_command(a, "bounds")?;
            print_bounds(&bundle);
            Ok(())
        }
        Command::TargetD(a) => run_target_command(a).map(drop),
        Command::Contour(a) => run_contour_command(a).map(drop),
        Command::Verify(a) => run_verify_command(a).map(drop),
    }
}
