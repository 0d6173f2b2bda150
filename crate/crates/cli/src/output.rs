//! Artifacts besides the run report: config echo, check results and the
//! metadata file, which is the only output carrying timestamps.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use fsse_core::{Result, SolverConfig};
use serde::Serialize;

use crate::checks::{CheckOutcome, Suite};

pub fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

/// The effective configuration after command-line overrides.
pub fn write_config_echo(cfg: &SolverConfig) -> Result<PathBuf> {
    fs::create_dir_all(&cfg.out)?;
    let p = cfg.out.join("config.toml");
    fs::write(&p, cfg.to_toml())?;
    Ok(p)
}

#[derive(Serialize)]
struct CheckFile<'a> {
    suite: &'a str,
    passed: bool,
    checks: &'a [CheckOutcome],
}

pub fn write_checks(dir: &Path, suite: Suite, checks: &[CheckOutcome]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let body = CheckFile { suite: suite.name(), passed: checks.iter().all(|c| c.passed), checks };
    let p = dir.join("check.json");
    fs::write(&p, serde_json::to_string_pretty(&body).expect("checks serialize"))?;
    Ok(vec![p])
}

#[derive(Serialize)]
struct Meta<'a> {
    tool: &'static str,
    version: &'static str,
    run: &'a str,
    dt_sweep: bool,
    config_hash: String,
    seed: u64,
    workers: usize,
    started_unix: f64,
    elapsed_seconds: f64,
    files: Vec<String>,
}

pub fn write_meta(
    cfg: &SolverConfig,
    run: &str,
    dt_sweep: bool,
    started: f64,
    elapsed: Duration,
    files: &[PathBuf],
) -> Result<()> {
    let meta = Meta {
        tool: "fsse",
        version: env!("CARGO_PKG_VERSION"),
        run,
        dt_sweep,
        config_hash: cfg.hash(),
        seed: cfg.seed,
        workers: rayon::current_num_threads(),
        started_unix: started,
        elapsed_seconds: elapsed.as_secs_f64(),
        files: files.iter().filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned())).collect(),
    };
    fs::write(cfg.out.join("meta.json"), serde_json::to_string_pretty(&meta).expect("metadata serializes"))?;
    Ok(())
}
