//! Mode-wise stochastic integrals against Q-fractional noise, and residuals
//! of the change-of-variables formula and of the stochastic Fubini exchange.

use num_complex::Complex64;
use rayon::prelude::*;

use super::{FracConfig, StieltjesIntegrator};
use crate::qnoise::NoiseField;
use crate::{Error, Result};

/// Relative change of the last partial sum above which a warning is attached.
pub const PARTIAL_SUM_THRESHOLD: f64 = 1e-2;

/// `Σ_p λ_p ∫ F_s(e_p) dβ_p` with its partial sums over `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticIntegral {
    pub value: Complex64,
    pub partial_sums: Vec<Complex64>,
    pub warning: Option<String>,
}

fn check_range(field: &NoiseField, start: usize, end: usize) -> Result<()> {
    if !(start < end && end < field.times().len()) {
        return Err(Error::Domain(format!(
            "time index range [{start}, {end}] is not inside a grid of {} times",
            field.times().len()
        )));
    }
    Ok(())
}

/// Integrator for `field` on `times[start..=end]`, after checking that `α`
/// lies in `(1−H, ½)`.
pub(crate) fn integrator_for(
    field: &NoiseField,
    start: usize,
    end: usize,
    cfg: &FracConfig,
) -> Result<StieltjesIntegrator> {
    cfg.check_stochastic(field.hurst())?;
    check_range(field, start, end)?;
    StieltjesIntegrator::new(&field.times()[start..=end], *cfg)
}

pub(crate) fn integrate_modes<F>(
    integrand: F,
    field: &NoiseField,
    start: usize,
    it: &StieltjesIntegrator,
) -> Result<StochasticIntegral>
where
    F: Fn(usize, usize) -> Complex64 + Sync,
{
    let len = it.times().len();
    let lambdas: Vec<f64> = field.spectrum().modes.iter().map(|m| m.lambda).collect();
    let per_mode: Vec<Complex64> = (0..field.mode_count())
        .into_par_iter()
        .map(|p| {
            let f: Vec<Complex64> = (start..start + len).map(|k| integrand(p, k)).collect();
            let g = &field.mode_path(p)[start..start + len];
            it.integrate(&f, g).map(|v| v * lambdas[p])
        })
        .collect::<Result<_>>()?;
    let mut acc = Complex64::new(0.0, 0.0);
    let partial_sums: Vec<Complex64> = per_mode
        .iter()
        .map(|v| {
            acc += v;
            acc
        })
        .collect();
    let warning = match partial_sums.as_slice() {
        [.., prev, last] => {
            let change = (last - prev).norm();
            let rel = change / last.norm().max(f64::MIN_POSITIVE);
            (change > 0.0 && rel > PARTIAL_SUM_THRESHOLD)
                .then(|| format!("mode sum not settled: last mode changes the value by {rel:.3e} (relative)"))
        }
        _ => None,
    };
    Ok(StochasticIntegral { value: acc, partial_sums, warning })
}

/// `Σ_p λ_p ∫_{t_start}^{t_end} F_s(e_p) dβ_p(s)`, where `integrand(p, k)`
/// returns `F_{t_k}(e_p)` for the unit-normalized eigenfunction `e_p`.
pub fn stochastic_integral<F>(
    integrand: F,
    field: &NoiseField,
    start: usize,
    end: usize,
    cfg: &FracConfig,
) -> Result<StochasticIntegral>
where
    F: Fn(usize, usize) -> Complex64 + Sync,
{
    let it = integrator_for(field, start, end, cfg)?;
    integrate_modes(integrand, field, start, &it)
}

/// A `C¹` functional `F(b, τ)` of a noise snapshot `b` and time `τ`.
pub trait FieldFunctional: Sync {
    fn value(&self, b: &[f64], t: f64) -> f64;
    /// `∂_2 F(b, t)`.
    fn time_derivative(&self, b: &[f64], t: f64) -> f64;
    /// `∂_1 F(b, t)` applied to the grid function `dir`.
    fn directional(&self, b: &[f64], t: f64, dir: &[f64]) -> f64;
}

/// `|F(B_t,t) − F(B_s,s) − ∫_s^t ∂_2F dτ − Σ_p λ_p ∫_s^t ∂_1F(B_τ,τ)(e_p) dβ_p|`
/// with `s = t_start`, `t = t_end`. The `dτ` integral uses the trapezoid rule.
pub fn chain_rule_residual<F: FieldFunctional>(
    func: &F,
    field: &NoiseField,
    start: usize,
    end: usize,
    cfg: &FracConfig,
) -> Result<f64> {
    let it = integrator_for(field, start, end, cfg)?;
    let times = field.times();
    let snaps: Vec<Vec<f64>> = (start..=end).into_par_iter().map(|k| field.values(k)).collect();
    let eigen: Vec<Vec<f64>> = (0..field.mode_count()).map(|p| field.eigenfunction(p)).collect();

    let lhs = func.value(&snaps[end - start], times[end]) - func.value(&snaps[0], times[start]);
    let dt_term: f64 = (start..end)
        .map(|k| {
            let a = func.time_derivative(&snaps[k - start], times[k]);
            let b = func.time_derivative(&snaps[k + 1 - start], times[k + 1]);
            0.5 * (a + b) * (times[k + 1] - times[k])
        })
        .sum();
    let noise = integrate_modes(
        |p, k| Complex64::new(func.directional(&snaps[k - start], times[k], &eigen[p]), 0.0),
        field,
        start,
        &it,
    )?;
    Ok((lhs - dt_term - noise.value.re).abs())
}

/// `|Σ_p λ_p ∫(∫_𝕋 F(e_p) dx) dβ_p − ∫_𝕋 (Σ_p λ_p ∫ F(e_p) dβ_p) dx|`, where
/// `family(p, k, i)` is `F_{t_k, x_i}(e_p)` and spatial integrals use the grid.
pub fn fubini_residual<F>(
    family: F,
    field: &NoiseField,
    start: usize,
    end: usize,
    cfg: &FracConfig,
) -> Result<f64>
where
    F: Fn(usize, usize, usize) -> Complex64 + Sync,
{
    let it = integrator_for(field, start, end, cfg)?;
    let size = field.torus().size();
    let dv = field.torus().cell_volume();
    let lhs = integrate_modes(
        |p, k| (0..size).map(|i| family(p, k, i)).sum::<Complex64>() * dv,
        field,
        start,
        &it,
    )?
    .value;
    let per_point: Vec<Complex64> = (0..size)
        .into_par_iter()
        .map(|i| integrate_modes(|p, k| family(p, k, i), field, start, &it).map(|s| s.value))
        .collect::<Result<_>>()?;
    let rhs = per_point.iter().sum::<Complex64>() * dv;
    Ok((lhs - rhs).norm())
}
