//! The named experiments. Each one returns a [`RunReport`] that depends on
//! the configuration alone.

use fsse_core::diagnostics::{
    charge_series, convergence_order, energy_identity_residual, gauge_equivalence_study, kinetic_energy,
    mollification_study,
};
use fsse_core::fbm::LagWindow;
use fsse_core::fraccalc::oracles::oracle_suite;
use fsse_core::report::SummaryValue;
use fsse_core::sse::{
    classical_residual, duhamel_residual, solve_direct, solve_gauge, trajectory_holder, weak_form_residual,
    FourierTestFunction,
};
use fsse_core::{
    Experiment, FracConfig, NoiseField, Problem, Result, RunReport, SolverConfig, StudyTable, Trajectory,
    WaveField,
};

/// Shortest trajectory for which a Hölder exponent is reported.
const HOLDER_MIN_STEPS: usize = 64;

pub fn run(cfg: &SolverConfig, sweep: bool) -> Result<RunReport> {
    let mut report = match cfg.experiment {
        Experiment::Solve => solve(cfg, sweep)?,
        Experiment::GaugeEquivalence => gauge_equivalence(cfg, sweep)?,
        Experiment::Fraccalc => fraccalc(cfg)?,
        Experiment::Mollification => mollification(cfg)?,
    };
    report.set("experiment", SummaryValue::Text(cfg.experiment.name().into()));
    report.number("seed", cfg.seed as f64);
    Ok(report)
}

/// The step sizes to run, coarsest first.
fn steps(cfg: &SolverConfig, sweep: bool) -> Vec<f64> {
    if sweep {
        let mut dts = cfg.solver.dt.clone();
        dts.sort_by(|a, b| b.total_cmp(a));
        dts.dedup();
        dts
    } else {
        vec![cfg.solver.dt[0]]
    }
}

fn sample_field(cfg: &SolverConfig) -> Result<NoiseField> {
    NoiseField::sample(&cfg.spectrum()?, cfg.torus()?, &cfg.noise_times()?, cfg.noise.hurst, cfg.seed)
}

fn frac_config(cfg: &SolverConfig) -> Result<FracConfig> {
    FracConfig::stochastic(cfg.solver.alpha, cfg.noise.hurst)
}

/// The lowest Fourier mode along the first axis, rotating at its free frequency.
fn test_function(cfg: &SolverConfig) -> Result<FourierTestFunction> {
    let torus = cfg.torus()?;
    let mut modes = vec![0i64; torus.dim];
    modes[0] = 1;
    Ok(FourierTestFunction { torus, omega: torus.wavenumber(1).powi(2), modes })
}

fn flag_order(report: &mut RunReport, prefix: &str, steps: &[f64], errors: &[f64]) {
    match convergence_order(steps, errors) {
        Ok(o) => {
            report.number(&format!("{prefix}_order"), o.order);
            report.flag(&format!("{prefix}_monotone"), o.monotone);
        }
        Err(e) => report.set(&format!("{prefix}_order"), SummaryValue::Text(e.to_string())),
    }
}

fn solve(cfg: &SolverConfig, sweep: bool) -> Result<RunReport> {
    let field = sample_field(cfg)?;
    let p = Problem::new(&field, cfg.nonlinearity)?;
    let psi0 = cfg.initial_datum()?;
    let scheme = cfg.solver.scheme;
    let t_end = cfg.solver.t_end;
    let dts = steps(cfg, sweep);
    let trajs: Vec<Trajectory> = dts
        .iter()
        .map(|&dt| Ok(solve_gauge(&p, &psi0, dt, t_end, scheme)?.with_config_hash(cfg.hash())))
        .collect::<Result<_>>()?;

    // Per-time rows for the finest run.
    let traj = trajs.last().expect("at least one step");
    let hash = cfg.hash();
    let mut report = RunReport::from_trajectory(&hash, &p.spectral, traj)?;
    let charge = charge_series(traj)?;
    let n0 = charge.norms[0].max(f64::MIN_POSITIVE);
    let drift: Vec<f64> = charge.norms.iter().map(|n| (n - n0).abs() / n0).collect();
    report.add_residual("charge_drift", &drift)?;
    let energy: Vec<f64> = traj.states.iter().map(|s| kinetic_energy(&p.spectral, s)).collect();
    report.add_residual("kinetic_energy", &energy)?;
    report.add_residual("duhamel", &duhamel_residual(&p, traj, scheme)?)?;

    let frac = frac_config(cfg)?;
    let last = traj.len() - 1;
    report.set("route", SummaryValue::Text(traj.provenance.route.clone()));
    report.number("dt", traj.times[1] - traj.times[0]);
    report.number("max_charge_drift", charge.max_relative_drift);
    let w = test_function(cfg)?;
    report.number("weak_form_residual", weak_form_residual(&p, traj, &w, last, &frac)?);
    if cfg.nonlinearity.is_none() {
        report.number("energy_identity_residual", energy_identity_residual(&p, traj, last, &frac)?);
    }
    if cfg.noise.q >= 2 {
        report.number("classical_residual", classical_residual(&p, traj, last, &frac)?);
    }
    if last >= HOLDER_MIN_STEPS {
        let order = (cfg.noise.q - 2) as f64;
        let est = trajectory_holder(&p.spectral, traj, order, LagWindow::finest(traj.len(), 5))?;
        report.number("holder_exponent", est);
    }

    if trajs.len() >= 2 {
        let reference = traj.last();
        let mut table = StudyTable::new("dt_sweep", &["dt", "terminal_gap", "charge_drift"]);
        let mut gaps = Vec::new();
        for (dt, tr) in dts.iter().zip(&trajs).take(trajs.len() - 1) {
            let gap = tr.last().l2_distance(reference)?;
            gaps.push(gap);
            table.push(vec![*dt, gap, charge_series(tr)?.max_relative_drift]);
        }
        flag_order(&mut report, "terminal_gap", &dts[..gaps.len()], &gaps);
        report.tables.push(table);
    }
    Ok(report)
}

fn gauge_equivalence(cfg: &SolverConfig, sweep: bool) -> Result<RunReport> {
    let field = sample_field(cfg)?;
    let p = Problem::new(&field, cfg.nonlinearity)?;
    let psi0 = cfg.initial_datum()?;
    let scheme = cfg.solver.scheme;
    let t_end = cfg.solver.t_end;
    let hash = cfg.hash();
    let mut report = if sweep {
        let dts = steps(cfg, true);
        let rows = gauge_equivalence_study(&p, &psi0, &dts, t_end, scheme)?;
        let mut report = RunReport::new(&hash);
        let mut table = StudyTable::new("gauge_gap", &["dt", "gap", "direct_drift", "gauge_drift"]);
        for r in &rows {
            table.push(vec![r.dt, r.gap, r.direct_drift, r.gauge_drift]);
        }
        let gaps: Vec<f64> = rows.iter().map(|r| r.gap).collect();
        flag_order(&mut report, "gap", &dts, &gaps);
        report.number("finest_gap", *gaps.last().expect("nonempty sweep"));
        report.tables.push(table);
        report
    } else {
        let dt = cfg.solver.dt[0];
        let (a, b) =
            rayon::join(|| solve_direct(&p, &psi0, dt, t_end), || solve_gauge(&p, &psi0, dt, t_end, scheme));
        let (a, b) = (a?, b?);
        let mut report = RunReport::from_trajectory(&hash, &p.spectral, &a)?;
        let gaps: Vec<f64> =
            a.states.iter().zip(&b.states).map(|(x, y)| x.l2_distance(y)).collect::<Result<_>>()?;
        let gauge_norms: Vec<f64> = b.states.iter().map(WaveField::l2_norm).collect();
        report.add_residual("gauge_gap", &gaps)?;
        report.add_residual("gauge_l2_norm", &gauge_norms)?;
        report.number("dt", dt);
        report.number("terminal_gap", *gaps.last().expect("nonempty"));
        report.number("direct_drift", charge_series(&a)?.max_relative_drift);
        report.number("gauge_drift", charge_series(&b)?.max_relative_drift);
        report
    };
    report.set("scheme", SummaryValue::Text(cfg.solver.scheme.name().into()));
    report.set("nonlinearity", SummaryValue::Text(cfg.nonlinearity.name().into()));
    Ok(report)
}

fn fraccalc(cfg: &SolverConfig) -> Result<RunReport> {
    let checks = oracle_suite(cfg.solver.alpha, cfg.noise.hurst, cfg.seed)?;
    let mut report = RunReport::new(cfg.hash());
    let mut table = StudyTable::new("oracles", &["check", "error", "tolerance"]);
    for (i, c) in checks.iter().enumerate() {
        table.push(vec![(i + 1) as f64, c.error, c.tolerance]);
        report.number(&format!("{}.error", c.name), c.error);
        report.flag(&format!("{}.passed", c.name), c.passed());
    }
    report.flag("all_passed", checks.iter().all(|c| c.passed()));
    report.tables.push(table);
    Ok(report)
}

fn nonincreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] <= w[0])
}

fn mollification(cfg: &SolverConfig) -> Result<RunReport> {
    let field = sample_field(cfg)?;
    let p = Problem::new(&field, cfg.nonlinearity)?;
    let psi0 = cfg.initial_datum()?;
    let mut eps = cfg.mollification.eps.clone();
    eps.sort_by(|a, b| b.total_cmp(a));
    let m = (cfg.noise.q + 4) as f64;
    let rows = mollification_study(&p, &psi0, cfg.solver.dt[0], cfg.solver.t_end, &eps, m)?;
    let mut report = RunReport::new(cfg.hash());
    let mut table = StudyTable::new("mollification", &["eps", "noise_gap", "solution_gap", "window"]);
    for r in &rows {
        table.push(vec![r.eps, r.noise_gap, r.solution_gap, r.window as f64]);
    }
    let noise: Vec<f64> = rows.iter().map(|r| r.noise_gap).collect();
    let sol: Vec<f64> = rows.iter().map(|r| r.solution_gap).collect();
    report.flag("noise_gap_nonincreasing", nonincreasing(&noise));
    report.flag("solution_gap_nonincreasing", nonincreasing(&sol));
    report.number("dt", cfg.solver.dt[0]);
    report.tables.push(table);
    Ok(report)
}
