//! Check suites: named pass/fail comparisons against tolerances.

use std::fmt;

use fsse_core::diagnostics::{charge_series, gauge_equivalence_study};
use fsse_core::fbm::{estimate_holder, fbm_covariance, uniform_grid, FbmSampler, LagWindow};
use fsse_core::fraccalc::oracles::oracle_suite;
use fsse_core::qnoise::spectral_derivative_defect;
use fsse_core::sse::{solve_direct, solve_gauge};
use fsse_core::{FbmMethod, NoiseField, Nonlinearity, Problem, Result, Scheme, SolverConfig, WaveField};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    /// Stieltjes and Weyl quadratures against closed forms and the Riemann sum.
    Fraccalc,
    /// fBm law, path regularity and cached noise derivatives.
    Noise,
    /// Free evolution, isometry, charge conservation and gauge equivalence.
    Solver,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Fraccalc => "fraccalc",
            Suite::Noise => "noise",
            Suite::Solver => "solver",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckOutcome {
    fn new(name: impl Into<String>, error: f64, tolerance: f64) -> Self {
        Self { name: name.into(), error, tolerance, passed: error.is_finite() && error <= tolerance }
    }
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {}: {:.3e} (tolerance {:.3e})", self.name, self.error, self.tolerance)
    }
}

pub fn run_suite(suite: Suite, cfg: &SolverConfig) -> Result<Vec<CheckOutcome>> {
    match suite {
        Suite::Fraccalc => Ok(oracle_suite(cfg.solver.alpha, cfg.noise.hurst, cfg.seed)?
            .into_iter()
            .map(|c| CheckOutcome::new(c.name, c.error, c.tolerance))
            .collect()),
        Suite::Noise => noise_suite(cfg),
        Suite::Solver => solver_suite(cfg),
    }
}

fn noise_suite(cfg: &SolverConfig) -> Result<Vec<CheckOutcome>> {
    let hurst = cfg.noise.hurst;
    let mut out = Vec::new();

    // Empirical covariance of 4000 paths; the sampling error is about 3%.
    let times = uniform_grid(1.0, 129);
    let sampler = FbmSampler::new(hurst, &times, FbmMethod::Circulant)?;
    let paths: Vec<Vec<f64>> =
        (0..4000u64).into_par_iter().map(|k| sampler.sample_stream(cfg.seed, k).values).collect();
    let mut worst: f64 = 0.0;
    for (i, j) in [(32, 32), (64, 128), (96, 48), (128, 128)] {
        let emp = paths.iter().map(|p| p[i] * p[j]).sum::<f64>() / paths.len() as f64;
        let exact = fbm_covariance(times[i], times[j], hurst)?;
        worst = worst.max((emp - exact).abs() / exact);
    }
    out.push(CheckOutcome::new("fbm_covariance_rel", worst, 0.1));

    let long = uniform_grid(1.0, (1 << 14) + 1);
    let path = FbmSampler::new(hurst, &long, FbmMethod::Circulant)?.sample(cfg.seed);
    let est = estimate_holder(&path, LagWindow::finest(long.len(), 8))?;
    out.push(CheckOutcome::new("holder_exponent_abs", (est - hurst).abs(), 0.05));

    let field = NoiseField::sample(&cfg.spectrum()?, cfg.torus()?, &uniform_grid(1.0, 9), hurst, cfg.seed)?;
    out.push(CheckOutcome::new("spectral_derivative_defect", spectral_derivative_defect(&field, 8), 1e-10));
    Ok(out)
}

fn solver_suite(cfg: &SolverConfig) -> Result<Vec<CheckOutcome>> {
    let torus = cfg.torus()?;
    let times = cfg.noise_times()?;
    let t_end = cfg.solver.t_end;
    let dt = cfg.solver.dt[0];
    let mut out = Vec::new();

    // Plane wave without noise: the kinetic step is exact.
    let quiet = NoiseField::quiet(torus, &times, cfg.noise.hurst)?;
    let p = Problem::new(&quiet, Nonlinearity::None)?;
    let modes = vec![1i64; torus.dim];
    let wave = WaveField::plane_wave(torus, &modes);
    let k2: f64 = modes.iter().map(|&m| torus.wavenumber(m).powi(2)).sum();
    let mut exact = wave.clone();
    exact.scale(num_complex::Complex64::from_polar(1.0, -k2 * t_end));
    let traj = solve_direct(&p, &wave, dt, t_end)?;
    out.push(CheckOutcome::new("free_evolution_max_abs", traj.last().max_abs_diff(&exact)?, 1e-10));

    let field = NoiseField::sample(&cfg.spectrum()?, torus, &times, cfg.noise.hurst, cfg.seed)?;
    let psi0 = cfg.initial_datum()?;
    let linear = Problem::new(&field, Nonlinearity::None)?;
    for (scheme, tol) in [(Scheme::CrankNicolsonMag, 1e-6), (Scheme::StrangGauge, 1e-10)] {
        let traj = solve_gauge(&linear, &psi0, dt, t_end, scheme)?;
        out.push(CheckOutcome::new(
            format!("isometry_{}", scheme.name()),
            charge_series(&traj)?.max_relative_drift,
            tol,
        ));
    }

    let p = Problem::new(&field, cfg.nonlinearity)?;
    let traj = solve_direct(&p, &psi0, dt, t_end)?;
    out.push(CheckOutcome::new("charge_drift_direct", charge_series(&traj)?.max_relative_drift, 1e-10));

    if cfg.solver.dt.len() >= 2 {
        let mut dts = cfg.solver.dt.clone();
        dts.sort_by(|a, b| b.total_cmp(a));
        let rows = gauge_equivalence_study(&p, &psi0, &dts, t_end, cfg.solver.scheme)?;
        // Number of refinements where the gap failed to shrink.
        let increases = rows
            .windows(2)
            .filter(|w| w[1].gap.partial_cmp(&w[0].gap) != Some(std::cmp::Ordering::Less))
            .count();
        out.push(CheckOutcome::new("gauge_gap_increases", increases as f64, 0.0));
    }
    Ok(out)
}
