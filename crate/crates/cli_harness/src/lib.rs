//! Experiment runner: `sevl <subcommand>` loads a TOML config, runs the bound
//! checks, and writes CSV artifacts plus a pass/fail report.

use std::ffi::OsString;
use std::io;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use thiserror::Error;

pub mod config;
pub mod criteria;
pub mod experiments;
pub mod plotdata;
pub mod report;
pub mod setup;

pub use config::ExperimentConfig;
use report::{overall, Check, Sink, Status};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Module(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "sevl", version, about = "Runs verification experiments and writes CSV reports")]
struct Cli {
    /// TOML experiment config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Results directory; overrides the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Ensemble size; overrides the config.
    #[arg(long, global = true)]
    paths: Option<usize>,
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Subcommand)]
enum Command {
    /// Skew cancellation, uniform renormalized cancellation and mollifier rates.
    VerifyOperators,
    /// Marcus flow translation, isometry, defect bounds and step doubling.
    VerifyMarcus,
    /// Structural identity and closed forms of the pressure laws.
    VerifyPressure {
        #[arg(long)]
        law: Option<String>,
    },
    /// Exponential envelope of the transport equation.
    MaxPrinciple,
    /// Stochastic compressible Euler ensemble with admissibility tracking.
    SimulateCompressible,
    /// Skew-noise incompressible ensemble with divergence and energy checks.
    SimulateIncompressible,
    /// Lyapunov inequalities and ensemble monitor.
    DniCheck,
    /// Occupation measures, stabilization and tightness.
    Ergodic,
    /// Summary of a results directory plus plot data.
    Report,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::VerifyOperators => "verify-operators",
            Command::VerifyMarcus => "verify-marcus",
            Command::VerifyPressure { .. } => "verify-pressure",
            Command::MaxPrinciple => "max-principle",
            Command::SimulateCompressible => "simulate-compressible",
            Command::SimulateIncompressible => "simulate-incompressible",
            Command::DniCheck => "dni-check",
            Command::Ergodic => "ergodic",
            Command::Report => "report",
        }
    }
}

pub const THREADS_VAR: &str = "SEVL_THREADS";

fn configure_threads() -> Result<(), HarnessError> {
    let Ok(v) = std::env::var(THREADS_VAR) else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| HarnessError::Config(format!("{THREADS_VAR} must be a positive integer, got '{v}'")))?;
    // a pool built earlier in this process stays in place
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn resolve(cli: &Cli) -> Result<ExperimentConfig, HarnessError> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    let name = cli.command.name();
    if !cfg.subcommand.is_empty() && cfg.subcommand != name {
        return Err(HarnessError::Config(format!(
            "config is for '{}' but '{name}' was requested",
            cfg.subcommand
        )));
    }
    cfg.subcommand = name.to_string();
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.output_dir = o.clone();
    }
    if let Some(p) = cli.paths {
        cfg.paths = p;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Runs one experiment into `<output_dir>/<subcommand>/` and returns its checks.
pub fn run_experiment(cfg: &ExperimentConfig, law: Option<&str>) -> Result<Vec<Check>, HarnessError> {
    let mut sink = Sink::new(&cfg.output_dir.join(&cfg.subcommand))?;
    sink.text(config::ECHO_NAME, &cfg.echo()?)?;
    let checks = match cfg.subcommand.as_str() {
        "verify-operators" => {
            let mut c = criteria::skew_cancellation(&mut sink, cfg.seed)?;
            c.extend(criteria::renormalized_cancellation(&mut sink)?);
            c.extend(criteria::convergence_rates(&mut sink)?);
            c
        }
        "verify-marcus" => criteria::marcus_flows(&mut sink, cfg.seed)?,
        "verify-pressure" => criteria::pressure(&mut sink, law)?,
        "max-principle" => criteria::max_principle(&mut sink)?,
        "simulate-compressible" => experiments::simulate_compressible(cfg, &mut sink)?.0,
        "simulate-incompressible" => experiments::simulate_incompressible(cfg, &mut sink)?,
        "dni-check" => experiments::dni_check(cfg, &mut sink)?,
        "ergodic" => experiments::ergodic(cfg, &mut sink)?,
        other => return Err(HarnessError::Config(format!("unknown subcommand '{other}'"))),
    };
    report::write_report(&mut sink, &cfg.subcommand, &checks)?;
    Ok(checks)
}

/// Writes `summary.csv` and `plotdata/` under `results`.
pub fn run_report(results: &Path) -> Result<(usize, usize), HarnessError> {
    let mut sink = Sink::new(results)?;
    let experiments = report::summarize(results, &mut sink)?;
    let series = plotdata::emit_plotdata(results, &mut sink)?;
    Ok((experiments, series))
}

fn print_checks(name: &str, checks: &[Check]) {
    for c in checks {
        println!("{name}: {} {} ({})", c.status, c.name, c.detail);
    }
}

/// Entry point: exit 0 when every asserted check passes, 1 on a failed check
/// or module error, 2 on a config or usage error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = configure_threads().and_then(|_| {
        let cfg = resolve(&cli)?;
        match &cli.command {
            Command::Report => {
                let (n, s) = run_report(&cfg.output_dir)?;
                if !cli.quiet {
                    println!("report: {n} experiments, {s} plot series in {}", cfg.output_dir.display());
                }
                Ok(Vec::new())
            }
            Command::VerifyPressure { law } => run_experiment(&cfg, law.as_deref()),
            _ => run_experiment(&cfg, None),
        }
    });
    match outcome {
        Ok(checks) => {
            let name = cli.command.name();
            if !cli.quiet {
                print_checks(name, &checks);
            }
            if overall(&checks) == Status::Fail {
                for c in checks.iter().filter(|c| c.status == Status::Fail) {
                    eprintln!("{name}: failed invariant: {} ({})", c.name, c.detail);
                }
                1
            } else {
                0
            }
        }
        Err(e) => {
            eprintln!("sevl: {e}");
            e.exit_code()
        }
    }
}
