//! `fsse`: run experiments and check suites from a TOML configuration.
//!
//! Exit status: 0 on success, 1 when a check suite fails, 2 for an invalid
//! configuration or command line, 3 for a numerical failure.

mod checks;
mod experiments;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use fsse_core::{Error, Experiment, SolverConfig};

use crate::checks::Suite;

/// Environment variable overriding the output directory of the config file.
const OUT_ENV: &str = "FSSE_OUT";

#[derive(Debug, Parser)]
#[command(name = "fsse", version, about = "Stochastic Schrödinger runs with fractional noise")]
struct Args {
    /// TOML configuration; the built-in defaults are used when omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Experiment to run, overriding the config.
    #[arg(long, value_name = "NAME")]
    experiment: Option<Experiment>,

    /// Run a check suite instead of an experiment.
    #[arg(long, value_name = "SUITE")]
    check: Option<Suite>,

    /// Master seed for the noise, overriding the config.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,

    /// Output directory; takes precedence over FSSE_OUT and the config.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Worker threads; 0 uses every core.
    #[arg(long, value_name = "K")]
    workers: Option<usize>,

    /// Run every step size in the config instead of the first one only.
    #[arg(long)]
    dt_sweep: bool,

    /// Print progress to stderr.
    #[arg(short, long)]
    verbose: bool,
}

enum Failure {
    Config(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) => Failure::Config(e.to_string()),
            other => Failure::Numerical(other.to_string()),
        }
    }
}

fn load_config(args: &Args) -> Result<SolverConfig, Failure> {
    let mut cfg = match &args.config {
        Some(path) => SolverConfig::load(path).map_err(|e| match e {
            Error::Io(io) => Failure::Config(format!("cannot read {}: {io}", path.display())),
            other => Failure::Config(other.to_string()),
        })?,
        None => SolverConfig::default(),
    };
    if let Some(e) = args.experiment {
        cfg.experiment = e;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    if let Some(out) = &args.out {
        cfg.out = out.clone();
    } else if let Some(out) = std::env::var_os(OUT_ENV) {
        cfg.out = PathBuf::from(out);
    }
    cfg.validate().map_err(|e| Failure::Config(e.to_string()))?;
    Ok(cfg)
}

fn run(args: &Args) -> Result<bool, Failure> {
    let cfg = load_config(args)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build_global()
        .map_err(|e| Failure::Numerical(format!("cannot start the worker pool: {e}")))?;
    let started = output::unix_now();
    let clock = Instant::now();
    let (label, files, passed) = match args.check {
        Some(suite) => {
            log::info!("running check suite {}", suite.name());
            let checks = checks::run_suite(suite, &cfg)?;
            for c in &checks {
                println!("{c}");
            }
            let passed = checks.iter().all(|c| c.passed);
            println!(
                "{}: {}/{} checks passed",
                suite.name(),
                checks.iter().filter(|c| c.passed).count(),
                checks.len()
            );
            let files = output::write_checks(&cfg.out, suite, &checks)?;
            (format!("check:{}", suite.name()), files, passed)
        }
        None => {
            log::info!("running experiment {}", cfg.experiment.name());
            let report = experiments::run(&cfg, args.dt_sweep)?;
            let files = report.write(&cfg.out)?;
            for (k, v) in &report.summary {
                println!("{k} = {}", serde_json::to_string(v).expect("summary serializes"));
            }
            (cfg.experiment.name().to_string(), files, true)
        }
    };
    let mut files = files;
    files.push(output::write_config_echo(&cfg)?);
    output::write_meta(&cfg, &label, args.dt_sweep, started, clock.elapsed(), &files)?;
    println!("wrote {} files to {}", files.len() + 1, cfg.out.display());
    Ok(passed)
}

fn main() -> ExitCode {
    let args = Args::parse();
    env_logger::Builder::new()
        .filter_level(if args.verbose { log::LevelFilter::Info } else { log::LevelFilter::Warn })
        .init();
    match run(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Config(msg)) => {
            eprintln!("fsse: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("fsse: {msg}");
            ExitCode::from(3)
        }
    }
}
