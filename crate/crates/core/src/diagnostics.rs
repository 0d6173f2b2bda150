//! Invariant monitors and refinement studies.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::fraccalc::FracConfig;
use crate::magschrod::Scheme;
use crate::qnoise::window_steps;
use crate::sse::{self, solve_direct, solve_gauge, Problem, Trajectory};
use crate::stats::linear_fit;
use crate::wave::WaveField;
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct ChargeSeries {
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    /// `max_t |‖Ψ(t)‖ − ‖Ψ₀‖| / ‖Ψ₀‖` (absolute when `Ψ₀ = 0`).
    pub max_relative_drift: f64,
}

pub fn charge_series(traj: &Trajectory) -> Result<ChargeSeries> {
    if traj.is_empty() {
        return Err(Error::Domain("empty trajectory".into()));
    }
    let norms: Vec<f64> = traj.states.iter().map(WaveField::l2_norm).collect();
    let n0 = norms[0];
    let scale = if n0 > 0.0 { n0 } else { 1.0 };
    let drift = norms.iter().map(|n| (n - n0).abs() / scale).fold(0.0, f64::max);
    Ok(ChargeSeries { times: traj.times.clone(), norms, max_relative_drift: drift })
}

/// `½‖∇Ψ‖²_{L²}`.
pub fn kinetic_energy(sp: &crate::Spectral, psi: &WaveField) -> f64 {
    let grads = sp.gradient(&psi.values);
    0.5 * grads.iter().map(|g| sp.l2_norm(g).powi(2)).sum::<f64>()
}

/// `|½‖∇Ψ(t)‖² − ½‖∇Ψ₀‖² + Im ∫_0^t ∫ Ψ̄ ∇Ψ·∇dB dx|` at trajectory index `upto`.
/// The stochastic term is `Σ_p λ_p ∫ F_p dβ_p` with
/// `F_p(s) = Im ∫ Ψ̄(s) ∇Ψ(s)·∇e_p dx`, evaluated by Stieltjes quadrature.
pub fn energy_identity_residual(
    p: &Problem,
    traj: &Trajectory,
    upto: usize,
    cfg: &FracConfig,
) -> Result<f64> {
    if !p.nonlinearity.is_none() {
        return Err(Error::Unsupported(format!(
            "the energy identity holds for g = 0 only, got {} nonlinearity",
            p.nonlinearity.name()
        )));
    }
    sse::check_alignment(p, traj)?;
    let it = sse::trajectory_integrator(p, traj, upto, cfg)?;
    let sp = &p.spectral;
    let dim = p.field.torus().dim;
    let dv = p.field.torus().cell_volume();
    let grads: Vec<Vec<Vec<Complex64>>> =
        traj.states[..=upto].par_iter().map(|s| sp.gradient(&s.values)).collect();
    let paths = sse::trajectory_paths(p, traj, upto);
    let stochastic: f64 = (0..p.field.mode_count())
        .into_par_iter()
        .map(|q| -> Result<f64> {
            let ge = p.field.mode_gradient(q);
            if ge.iter().all(|c| c.iter().all(|v| *v == 0.0)) {
                return Ok(0.0);
            }
            let f: Vec<f64> = (0..=upto)
                .map(|k| {
                    let psi = &traj.states[k].values;
                    let mut acc = Complex64::new(0.0, 0.0);
                    for a in 0..dim {
                        for (x, z) in psi.iter().enumerate() {
                            acc += z.conj() * grads[k][a][x] * ge[a][x];
                        }
                    }
                    acc.im * dv
                })
                .collect();
            it.integrate(&f, &paths[q])
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .sum();
    let de = kinetic_energy(sp, &traj.states[upto]) - kinetic_energy(sp, &traj.states[0]);
    Ok((de + stochastic).abs())
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MollificationRow {
    pub eps: f64,
    /// Averaging window in time steps (0 when the field is left unchanged).
    pub window: usize,
    /// `sup_t ‖B^ε − B‖_{H^m}`.
    pub noise_gap: f64,
    /// `‖Ψ^ε(T) − Ψ(T)‖_{L²}`, both by the direct solver.
    pub solution_gap: f64,
}

/// Solve with the field and with its mollifications `B^ε` for each `ε`,
/// reporting noise and terminal solution gaps. `m` is the Sobolev order of
/// the noise gap (the regularity `q + 4` in the uniqueness argument).
pub fn mollification_study(
    p: &Problem,
    psi0: &WaveField,
    dt: f64,
    t_end: f64,
    eps: &[f64],
    m: f64,
) -> Result<Vec<MollificationRow>> {
    let reference = solve_direct(p, psi0, dt, t_end)?;
    let h = crate::fbm::uniform_spacing(p.field.times()).expect("uniform by construction");
    eps.par_iter()
        .map(|&e| -> Result<MollificationRow> {
            let smooth = p.field.mollify(e)?;
            let q = Problem { spectral: p.spectral.clone(), field: &smooth, nonlinearity: p.nonlinearity };
            let traj = solve_direct(&q, psi0, dt, t_end)?;
            Ok(MollificationRow {
                eps: e,
                window: if e < h { 0 } else { window_steps(e, h) },
                noise_gap: smooth.sup_gap(p.field, m)?,
                solution_gap: traj.last().l2_distance(reference.last())?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConvergenceOrder {
    /// Least-squares slope of `log error` against `log step`.
    pub order: f64,
    /// `true` when errors strictly decrease as the step decreases.
    pub monotone: bool,
}

/// Empirical order from `(step, error)` rows; at least three rows with
/// positive errors. A non-monotone column is flagged, not rejected.
pub fn convergence_order(steps: &[f64], errors: &[f64]) -> Result<ConvergenceOrder> {
    if steps.len() != errors.len() {
        return Err(Error::shape(format!("{} errors", steps.len()), errors.len().to_string()));
    }
    if steps.len() < 3 {
        return Err(Error::Estimation(format!(
            "need at least 3 rows to estimate an order, got {}",
            steps.len()
        )));
    }
    if let Some(e) = errors.iter().chain(steps).find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::Estimation(format!("steps and errors must be positive, got {e}")));
    }
    let mut rows: Vec<(f64, f64)> = steps.iter().copied().zip(errors.iter().copied()).collect();
    rows.sort_by(|a, b| b.0.total_cmp(&a.0));
    let monotone = rows.windows(2).all(|w| w[1].1 < w[0].1);
    let xs: Vec<f64> = rows.iter().map(|r| r.0.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.1.ln()).collect();
    let (order, _) = linear_fit(&xs, &ys)?;
    Ok(ConvergenceOrder { order, monotone })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GaugeGapRow {
    pub dt: f64,
    pub gap: f64,
    pub direct_drift: f64,
    pub gauge_drift: f64,
}

/// Terminal `‖Ψ_direct(T) − Ψ_gauge(T)‖_{L²}` for each step.
pub fn gauge_equivalence_study(
    p: &Problem,
    psi0: &WaveField,
    dts: &[f64],
    t_end: f64,
    scheme: Scheme,
) -> Result<Vec<GaugeGapRow>> {
    dts.par_iter()
        .map(|&dt| -> Result<GaugeGapRow> {
            let (a, b) =
                rayon::join(|| solve_direct(p, psi0, dt, t_end), || solve_gauge(p, psi0, dt, t_end, scheme));
            let (a, b) = (a?, b?);
            Ok(GaugeGapRow {
                dt,
                gap: a.last().l2_distance(b.last())?,
                direct_drift: charge_series(&a)?.max_relative_drift,
                gauge_drift: charge_series(&b)?.max_relative_drift,
            })
        })
        .collect()
}
