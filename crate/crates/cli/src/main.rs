//! `ruin`: simulate, solve, verify and compare finite-horizon ruin functionals.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ruin_core::config::{parse_config, reference_config, RunConfig};
use ruin_core::mc::estimate_psi;
use ruin_core::numeric::{thread_cap_from_env, PathStreams};
use ruin_core::oracles::{brownian_first_passage, cramer_lundberg_ultimate, fine_mc, OracleResult, Provenance};
use ruin_core::pide::{solve_ruin, RuinedValue};
use ruin_core::reserve::{simulate_path, SchemeKind, SimScheme};
use ruin_core::viscosity::{verify_field, SampleSpec, VerifyOptions};
use ruin_core::{compare::run_compare, SamplePath};

/// Kept in step with `ruin_core::config::SCHEMA_VERSION`; the CLI tests compare the two.
const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (config schema 1)");

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] ruin_core::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("field file: {0}")]
    Field(String),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }
}

impl From<std::io::Error> for CliError {
    fn from(source: std::io::Error) -> Self {
        CliError::Io { path: PathBuf::from("<stdout>"), source }
    }
}

#[derive(Parser)]
#[command(name = "ruin", version = VERSION, about = "Finite-horizon ruin with risky investments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo estimate of Ψ(t0, u0) for one or more capitals.
    Simulate(SimulateArgs),
    /// Solve the backward equation and write the whole field.
    Solve(SolveArgs),
    /// Check sub/supersolution inequalities on a field read from CSV.
    Verify(VerifyArgs),
    /// PIDE and Monte Carlo side by side; exit status 1 if any row fails.
    Compare(CompareArgs),
    /// Reference values for debugging.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Args)]
struct SimulateArgs {
    /// TOML run configuration; the shipped reference model when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    t0: f64,
    /// Initial capital; repeat for several rows.
    #[arg(long, required = true, num_args = 1..)]
    u0: Vec<f64>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// `euler` or `exact_between_jumps`.
    #[arg(long)]
    scheme: Option<SchemeKind>,
    #[arg(long)]
    dt_max: Option<f64>,
    /// Brownian-bridge crossing test on diffusive steps.
    #[arg(long)]
    bridge: Option<bool>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write path 0 of the first capital as `time,X,S,event_type`.
    #[arg(long)]
    dump_path: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    nu: Option<usize>,
    #[arg(long)]
    nt: Option<usize>,
    #[arg(long)]
    umax: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// `t,u,psi` CSV as written by `solve`.
    #[arg(long)]
    field: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    samples: Option<usize>,
    /// Absolute residual tolerance; defaults to `C (Δu + Δt)` with `C` from the config.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Reflection formula for `u + a s + σ W_s`.
    Brownian {
        #[arg(long)]
        u: f64,
        #[arg(long, default_value_t = 0.0)]
        a: f64,
        #[arg(long)]
        sigma: f64,
        #[arg(long)]
        h: f64,
    },
    /// Ultimate ruin of the classical model with exponential claims.
    CramerLundberg {
        #[arg(long)]
        u: f64,
        #[arg(long)]
        c: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        mu: f64,
    },
    /// Plain fine-step Euler Monte Carlo.
    FineMc {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0.0)]
        t0: f64,
        #[arg(long)]
        u0: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 100_000)]
        paths: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn load(path: Option<&Path>) -> Result<RunConfig, CliError> {
    match path {
        Some(p) => Ok(parse_config(p)?),
        None => Ok(reference_config()),
    }
}

fn simulate(args: SimulateArgs) -> Result<bool, CliError> {
    let mut cfg = load(args.config.as_deref())?;
    if let Some(h) = args.horizon {
        cfg.model.horizon = h;
    }
    let sim = &cfg.simulation;
    let scheme = SimScheme::new(args.scheme.unwrap_or(sim.scheme), args.dt_max.unwrap_or(sim.dt_max))
        .with_bridge(args.bridge.unwrap_or(sim.bridge));
    let (paths, seed) = (args.paths.unwrap_or(sim.paths), args.seed.unwrap_or(sim.seed));
    let mut w = output::writer(args.out.as_deref())?;
    w.write_record(["u", "t", "mean", "se", "ci_lo", "ci_hi", "n_paths"])?;
    for &u in &args.u0 {
        let e = estimate_psi(args.t0, u, &cfg.model, paths, &scheme, seed)?;
        w.write_record([
            u.to_string(),
            args.t0.to_string(),
            e.mean.to_string(),
            e.std_error.to_string(),
            e.ci95.0.to_string(),
            e.ci95.1.to_string(),
            e.n_paths.to_string(),
        ])?;
    }
    w.flush()?;
    if let Some(p) = &args.dump_path {
        let path = simulate_path(args.t0, args.u0[0], &cfg.model, &scheme, &mut PathStreams::new(seed, 0))?;
        dump_path(&path, p)?;
    }
    Ok(true)
}

fn dump_path(path: &SamplePath, to: &Path) -> Result<(), CliError> {
    let mut w = output::writer(Some(to))?;
    w.write_record(["time", "X", "S", "event_type"])?;
    for k in 0..path.times.len() {
        w.write_record([
            path.times[k].to_string(),
            path.values[k].to_string(),
            path.prices[k].to_string(),
            path.events[k].as_str().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn solve(args: SolveArgs) -> Result<bool, CliError> {
    let mut cfg = load(args.config.as_deref())?;
    cfg.grid.nu = args.nu.unwrap_or(cfg.grid.nu);
    cfg.grid.nt = args.nt.unwrap_or(cfg.grid.nt);
    cfg.grid.u_max = args.umax.unwrap_or(cfg.grid.u_max);
    let grid = cfg.grid.build(cfg.model.horizon)?;
    let field = solve_ruin(&grid, &cfg.model)?;
    output::write_field(&field, args.out.as_deref())?;
    Ok(true)
}

fn verify(args: VerifyArgs) -> Result<bool, CliError> {
    let cfg = load(args.config.as_deref())?;
    let field = output::read_field(&args.field, RuinedValue::for_payoff(&cfg.model.payoff))?;
    if (field.grid().horizon() - cfg.model.horizon).abs() > 1e-12 * cfg.model.horizon {
        return Err(CliError::Usage(format!(
            "field ends at t = {} but the model horizon is {}",
            field.grid().horizon(),
            cfg.model.horizon
        )));
    }
    let spec = SampleSpec::Random {
        n: args.samples.unwrap_or(cfg.verify.samples),
        seed: cfg.verify.seed,
        region: cfg.verify.region(cfg.model.horizon),
    };
    let opts = VerifyOptions { c: cfg.verify.c, tol: args.tol, ..Default::default() };
    let report = verify_field(&field, &cfg.model, &spec, &opts)?;
    if let Some(p) = &args.report {
        let mut w = output::writer(Some(p))?;
        w.write_record(["t", "u", "residual", "superjet", "subjet", "pass"])?;
        for pt in &report.points {
            w.write_record([
                pt.t.to_string(),
                pt.u.to_string(),
                pt.residual.to_string(),
                pt.superjet.to_string(),
                pt.subjet.to_string(),
                pt.pass.to_string(),
            ])?;
        }
        w.flush()?;
    }
    eprintln!(
        "verify: {} of {} points pass ({:.2}%), {} failed, {} without a jet; tol {:.3e} (C = {})",
        report.passed,
        report.tested(),
        100.0 * report.pass_fraction(),
        report.failed,
        report.empty_jet,
        report.tol,
        report.c
    );
    Ok(report.passed == report.tested())
}

fn compare(args: CompareArgs) -> Result<bool, CliError> {
    let cfg = load(args.config.as_deref())?;
    let report = run_compare(&cfg)?;
    let mut w = output::writer(args.out.as_deref())?;
    w.write_record(["u", "psi_pide", "psi_mc", "se", "abs_diff", "pass"])?;
    for r in &report.rows {
        w.write_record([
            r.u.to_string(),
            r.psi_pide.to_string(),
            r.psi_mc.to_string(),
            r.se.to_string(),
            r.abs_diff.to_string(),
            if r.pass { "pass" } else { "fail" }.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(report.pass())
}

fn oracle(cmd: OracleCommand) -> Result<bool, CliError> {
    let (name, res) = match cmd {
        OracleCommand::Brownian { u, a, sigma, h } => (
            "brownian_first_passage",
            OracleResult {
                value: brownian_first_passage(u, a, sigma, h)?,
                error_bound: 0.0,
                provenance: Provenance::ClosedForm,
            },
        ),
        OracleCommand::CramerLundberg { u, c, lambda, mu } => (
            "cramer_lundberg_ultimate",
            OracleResult {
                value: cramer_lundberg_ultimate(u, c, lambda, mu)?,
                error_bound: 0.0,
                provenance: Provenance::ClosedForm,
            },
        ),
        OracleCommand::FineMc { config, t0, u0, dt, paths, seed } => {
            let cfg = load(config.as_deref())?;
            ("fine_mc", fine_mc(t0, u0, &cfg.model, dt, paths, seed)?)
        }
    };
    let provenance = match res.provenance {
        Provenance::ClosedForm => "closed_form",
        Provenance::FineMc => "fine_mc",
    };
    let mut w = output::writer(None)?;
    w.write_record(["oracle", "value", "error_bound", "provenance"])?;
    w.write_record([name, &res.value.to_string(), &res.error_bound.to_string(), provenance])?;
    w.flush()?;
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = thread_cap_from_env() {
        // fails only if a pool already exists, which cannot happen this early
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let outcome = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Solve(a) => solve(a),
        Command::Verify(a) => verify(a),
        Command::Compare(a) => compare(a),
        Command::Oracle(c) => oracle(c),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
