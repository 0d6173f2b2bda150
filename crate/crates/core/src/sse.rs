//! Solution of `dΨ = iΔΨ dt − iΨ dB − i g(Ψ) dt` by two independent routes,
//! plus residuals that certify a trajectory against the representation
//! formula and the weak formulation.
//!
//! * [`solve_direct`] splits the equation in `Ψ`: half free flow, the exact
//!   phase `e^{−i(δB + dt·W[Ψ])}`, half free flow. The noise enters only
//!   through exact increments, which is the Stratonovich/Young reading of the
//!   equation for `H > ½`.
//! * [`solve_gauge`] evolves `φ = e^{iB}Ψ` under the magnetic propagator,
//!   with the nonlinear phase flow as Strang half steps, and maps back.

use num_complex::Complex64;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::fbm::{structure_exponent, uniform_spacing, LagWindow};
use crate::fraccalc::{FracConfig, StieltjesIntegrator};
use crate::magschrod::{MagneticPropagator, Scheme};
use crate::nonlinear::Nonlinearity;
use crate::qnoise::NoiseField;
use crate::spectral::Spectral;
use crate::wave::WaveField;
use crate::{Error, Result};

/// A noise realization, its grid, and the nonlinearity.
#[derive(Debug, Clone)]
pub struct Problem<'a> {
    pub spectral: Spectral,
    pub field: &'a NoiseField,
    pub nonlinearity: Nonlinearity,
}

impl<'a> Problem<'a> {
    pub fn new(field: &'a NoiseField, nonlinearity: Nonlinearity) -> Result<Self> {
        check_noise_time_grid(field)?;
        if let Nonlinearity::Hartree { .. } = nonlinearity {
            nonlinearity.validate(field.torus().dim, 1)?;
        }
        Ok(Self { spectral: Spectral::new(*field.torus()), field, nonlinearity })
    }

    /// Noise-grid stride of a step `dt` and the index of `t_end`.
    fn step_plan(&self, dt: f64, t_end: f64, multiple: usize) -> Result<(usize, usize)> {
        let h = uniform_spacing(self.field.times()).expect("checked at construction");
        let stride = (dt / h).round() as usize;
        if stride == 0 || ((stride as f64) * h - dt).abs() > 1e-9 * dt {
            return Err(Error::Domain(format!("time step {dt} is not a multiple of the noise spacing {h}")));
        }
        if !stride.is_multiple_of(multiple) {
            return Err(Error::Domain(format!(
                "time step {dt} spans {stride} noise intervals; the scheme needs a multiple of {multiple}"
            )));
        }
        let end = self
            .field
            .index_of(t_end)
            .ok_or_else(|| Error::Domain(format!("final time {t_end} is not on the noise time grid")))?;
        if end == 0 || end % stride != 0 {
            return Err(Error::Domain(format!(
                "final time {t_end} is not a positive multiple of the step {dt}"
            )));
        }
        Ok((stride, end))
    }

    fn check_initial(&self, psi0: &WaveField) -> Result<()> {
        if psi0.torus != *self.field.torus() {
            return Err(Error::shape(format!("{:?}", self.field.torus()), format!("{:?}", psi0.torus)));
        }
        if !psi0.is_finite() {
            return Err(Error::Domain("initial datum has non-finite values".into()));
        }
        Ok(())
    }
}

fn check_noise_time_grid(field: &NoiseField) -> Result<()> {
    if field.times().len() < 2 || uniform_spacing(field.times()).is_none() {
        return Err(Error::Domain("the solver needs a uniform noise time grid".into()));
    }
    Ok(())
}

/// Where a trajectory came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    /// `direct` or `gauge/<scheme>`.
    pub route: String,
    pub seed: u64,
    pub config_hash: String,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Noise-grid index of each time.
    pub noise_indices: Vec<usize>,
    pub states: Vec<WaveField>,
    pub provenance: Provenance,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> &WaveField {
        self.states.last().expect("trajectories are nonempty")
    }

    /// Replace the provenance hash, e.g. with the hash of the run configuration.
    pub fn with_config_hash(mut self, hash: impl Into<String>) -> Self {
        self.provenance.config_hash = hash.into();
        self
    }
}

fn run_hash(route: &str, p: &Problem, dt: f64, t_end: f64, psi0: &WaveField) -> String {
    let mut h = Sha256::new();
    h.update(format!(
        "{route}|{:?}|{:?}|{}|{}|{dt:e}|{t_end:e}|{}|{:?}",
        p.field.torus(),
        p.nonlinearity,
        p.field.hurst(),
        p.field.seed(),
        p.field.mode_count(),
        p.field.spectrum().decay
    ));
    for z in &psi0.values {
        h.update(z.re.to_le_bytes());
        h.update(z.im.to_le_bytes());
    }
    hex::encode(h.finalize())
}

fn trajectory(
    route: String,
    p: &Problem,
    dt: f64,
    t_end: f64,
    stride: usize,
    states: Vec<WaveField>,
) -> Trajectory {
    let noise_indices: Vec<usize> = (0..states.len()).map(|k| k * stride).collect();
    let times = noise_indices.iter().map(|&i| p.field.times()[i]).collect();
    let config_hash = run_hash(&route, p, dt, t_end, &states[0]);
    Trajectory {
        times,
        noise_indices,
        states,
        provenance: Provenance { route, seed: p.field.seed(), config_hash },
    }
}

/// Split-step solution in the original variable.
pub fn solve_direct(p: &Problem, psi0: &WaveField, dt: f64, t_end: f64) -> Result<Trajectory> {
    p.check_initial(psi0)?;
    let (stride, end) = p.step_plan(dt, t_end, 1)?;
    let sp = &p.spectral;
    let mut states = Vec::with_capacity(end / stride + 1);
    states.push(psi0.clone());
    let mut psi = psi0.clone();
    let mut k = 0;
    while k < end {
        let db = p.field.increment(k, k + stride);
        sp.free_flow_in_place(&mut psi.values, 0.5 * dt);
        let w = p.nonlinearity.phase_rate(sp, &psi)?;
        for ((z, b), r) in psi.values.iter_mut().zip(&db).zip(&w) {
            *z *= Complex64::from_polar(1.0, -(b + dt * r));
        }
        sp.free_flow_in_place(&mut psi.values, 0.5 * dt);
        if !psi.is_finite() {
            return Err(Error::Numerical(format!(
                "direct solve produced non-finite values at t = {}",
                p.field.times()[k + stride]
            )));
        }
        states.push(psi.clone());
        k += stride;
    }
    Ok(trajectory("direct".into(), p, dt, t_end, stride, states))
}

/// Gauge route: `φ = e^{iB}Ψ` is advanced by `N_{dt/2} ∘ U(t+dt, t) ∘ N_{dt/2}`,
/// where `N_τ` is the exact nonlinear phase flow (gauge invariance gives
/// `e^{iB}g(Ψ) = g(φ)`), and `Ψ = e^{−iB}φ` is recorded.
pub fn solve_gauge(p: &Problem, psi0: &WaveField, dt: f64, t_end: f64, scheme: Scheme) -> Result<Trajectory> {
    p.check_initial(psi0)?;
    let (stride, end) = p.step_plan(dt, t_end, scheme.stride_multiple())?;
    let sp = &p.spectral;
    let prop = MagneticPropagator::new(sp.clone(), scheme);
    let mut phi = psi0.clone();
    phi.apply_phase(&p.field.values(0), 1.0);
    let mut states = Vec::with_capacity(end / stride + 1);
    states.push(psi0.clone());
    let mut k = 0;
    while k < end {
        p.nonlinearity.phase_flow(sp, &mut phi, 0.5 * dt)?;
        phi = prop.step_indices(&phi, p.field, k, k + stride, None)?;
        p.nonlinearity.phase_flow(sp, &mut phi, 0.5 * dt)?;
        let mut psi = phi.clone();
        psi.apply_phase(&p.field.values(k + stride), -1.0);
        states.push(psi);
        k += stride;
    }
    Ok(trajectory(format!("gauge/{}", scheme.name()), p, dt, t_end, stride, states))
}

pub(crate) fn check_alignment(p: &Problem, traj: &Trajectory) -> Result<usize> {
    let n = traj.states.len();
    if n < 2 || traj.times.len() != n || traj.noise_indices.len() != n {
        return Err(Error::shape(
            "a trajectory with at least two aligned snapshots",
            format!("{n} states, {} times", traj.times.len()),
        ));
    }
    let stride = traj.noise_indices[1] - traj.noise_indices[0];
    for (k, (&i, &t)) in traj.noise_indices.iter().zip(&traj.times).enumerate() {
        if i != traj.noise_indices[0] + k * stride
            || i >= p.field.times().len()
            || (p.field.times()[i] - t).abs() > 1e-12 * t.abs().max(1.0)
        {
            return Err(Error::Domain("trajectory times do not match the noise time grid".into()));
        }
    }
    if traj.states[0].torus != *p.field.torus() {
        return Err(Error::shape(format!("{:?}", p.field.torus()), format!("{:?}", traj.states[0].torus)));
    }
    Ok(stride)
}

/// `‖Ψ(t) − e^{−iB_t}[U(t,0)Ψ₀ + ∫_0^t U(t,s) h(s) ds]‖_{L²}` at every
/// trajectory time, with `h = −i e^{iB}g(Ψ)` and the Duhamel integral by the
/// trapezoid rule on the trajectory grid. `U` is realized by `scheme`.
pub fn duhamel_residual(p: &Problem, traj: &Trajectory, scheme: Scheme) -> Result<Vec<f64>> {
    let stride = check_alignment(p, traj)?;
    if stride % scheme.stride_multiple() != 0 {
        return Err(Error::Domain(format!("{} needs step midpoints on the noise grid", scheme.name())));
    }
    let sp = &p.spectral;
    let prop = MagneticPropagator::new(sp.clone(), scheme);
    let forcing = |k: usize| -> Result<WaveField> {
        let mut h = p.nonlinearity.apply(sp, &traj.states[k])?;
        h.apply_phase(&p.field.values(traj.noise_indices[k]), 1.0);
        h.scale(-Complex64::i());
        Ok(h)
    };
    let has_g = !p.nonlinearity.is_none();
    let mut linear = traj.states[0].clone();
    linear.apply_phase(&p.field.values(traj.noise_indices[0]), 1.0);
    let mut duhamel = WaveField::zeros(linear.torus);
    let mut h_prev = if has_g { Some(forcing(0)?) } else { None };
    let mut out = vec![0.0];
    for k in 0..traj.states.len() - 1 {
        let (i, j) = (traj.noise_indices[k], traj.noise_indices[k + 1]);
        let dt = traj.times[k + 1] - traj.times[k];
        linear = prop.step_indices(&linear, p.field, i, j, None)?;
        if let Some(hp) = &h_prev {
            duhamel.axpy(Complex64::new(0.5 * dt, 0.0), hp)?;
            duhamel = prop.step_indices(&duhamel, p.field, i, j, None)?;
            let hn = forcing(k + 1)?;
            duhamel.axpy(Complex64::new(0.5 * dt, 0.0), &hn)?;
            h_prev = Some(hn);
        }
        let mut rebuilt = linear.clone();
        rebuilt.axpy(Complex64::new(1.0, 0.0), &duhamel)?;
        rebuilt.apply_phase(&p.field.values(j), -1.0);
        out.push(rebuilt.l2_distance(&traj.states[k + 1])?);
    }
    Ok(out)
}

/// A smooth space-time test function.
pub trait TestFunction: Sync {
    fn value(&self, t: f64) -> WaveField;
    fn time_derivative(&self, t: f64) -> WaveField;
}

/// `w(t,x) = e^{i(k·x − ωt)} / √|𝕋|` for an integer mode vector.
#[derive(Debug, Clone)]
pub struct FourierTestFunction {
    pub torus: crate::spectral::Torus,
    pub modes: Vec<i64>,
    pub omega: f64,
}

impl TestFunction for FourierTestFunction {
    fn value(&self, t: f64) -> WaveField {
        let mut w = WaveField::plane_wave(self.torus, &self.modes);
        w.scale(Complex64::from_polar(1.0 / self.torus.volume().sqrt(), -self.omega * t));
        w
    }

    fn time_derivative(&self, t: f64) -> WaveField {
        let mut w = self.value(t);
        w.scale(Complex64::new(0.0, -self.omega));
        w
    }
}

pub(crate) fn trapezoid(times: &[f64], values: &[Complex64]) -> Complex64 {
    (0..times.len() - 1).map(|k| (values[k] + values[k + 1]) * (0.5 * (times[k + 1] - times[k]))).sum()
}

/// Integrator on the trajectory grid (a subsample of the noise grid).
pub(crate) fn trajectory_integrator(
    p: &Problem,
    traj: &Trajectory,
    upto: usize,
    cfg: &FracConfig,
) -> Result<StieltjesIntegrator> {
    cfg.check_stochastic(p.field.hurst())?;
    if upto == 0 || upto >= traj.states.len() {
        return Err(Error::Domain(format!("time index {upto} must lie in 1..{}", traj.states.len())));
    }
    StieltjesIntegrator::new(&traj.times[..=upto], *cfg)
}

/// Mode paths restricted to the trajectory grid.
pub(crate) fn trajectory_paths(p: &Problem, traj: &Trajectory, upto: usize) -> Vec<Vec<f64>> {
    (0..p.field.mode_count())
        .map(|q| {
            let path = p.field.mode_path(q);
            traj.noise_indices[..=upto].iter().map(|&i| path[i]).collect()
        })
        .collect()
}

/// Absolute residual of the weak formulation at trajectory index `upto`:
/// `(Ψ(t),w(t)) − (Ψ₀,w(0)) − ∫(Ψ,∂_s w) + i∫(Ψ,Δw) − i Σ_p λ_p ∫(Ψe_p, w) dβ_p − i∫(g(Ψ),w)`,
/// with `(f, g) = ∫ f̄ g`. Time integrals use the trapezoid rule on the
/// trajectory grid and the stochastic term the Stieltjes quadrature.
pub fn weak_form_residual(
    p: &Problem,
    traj: &Trajectory,
    w: &dyn TestFunction,
    upto: usize,
    cfg: &FracConfig,
) -> Result<f64> {
    check_alignment(p, traj)?;
    let it = trajectory_integrator(p, traj, upto, cfg)?;
    let sp = &p.spectral;
    let times = &traj.times[..=upto];
    let ws: Vec<WaveField> = times.iter().map(|&t| w.value(t)).collect();
    let inner = |a: &WaveField, b: &WaveField| sp.inner(&a.values, &b.values);

    let pairing: Vec<Complex64> = (0..=upto).map(|k| inner(&traj.states[k], &ws[k])).collect();
    let dw: Vec<Complex64> =
        (0..=upto).map(|k| inner(&traj.states[k], &w.time_derivative(times[k]))).collect();
    let lap: Vec<Complex64> = (0..=upto)
        .map(|k| {
            let lw = WaveField { torus: ws[k].torus, values: sp.laplacian(&ws[k].values) };
            inner(&traj.states[k], &lw)
        })
        .collect::<Vec<_>>();
    let g_term: Vec<Complex64> = (0..=upto)
        .map(|k| -> Result<Complex64> {
            let g = p.nonlinearity.apply(sp, &traj.states[k])?;
            Ok(inner(&g, &ws[k]))
        })
        .collect::<Result<_>>()?;

    let paths = trajectory_paths(p, traj, upto);
    let lambdas: Vec<f64> = p.field.spectrum().modes.iter().map(|m| m.lambda).collect();
    let dv = p.field.torus().cell_volume();
    let noise: Vec<Complex64> = (0..p.field.mode_count())
        .into_par_iter()
        .map(|q| {
            let e = p.field.eigenfunction(q);
            let f: Vec<Complex64> = (0..=upto)
                .map(|k| {
                    traj.states[k]
                        .values
                        .iter()
                        .zip(&e)
                        .zip(&ws[k].values)
                        .map(|((s, ep), wv)| s.conj() * ep * wv)
                        .sum::<Complex64>()
                        * dv
                })
                .collect();
            it.integrate(&f, &paths[q]).map(|v| v * lambdas[q])
        })
        .collect::<Result<_>>()?;
    let noise: Complex64 = noise.into_iter().sum();

    let i = Complex64::i();
    let lhs = pairing[upto] - pairing[0];
    let rhs = trapezoid(times, &dw) - i * trapezoid(times, &lap) + i * noise + i * trapezoid(times, &g_term);
    Ok((lhs - rhs).norm())
}

/// `‖Ψ(t) − Ψ₀ − i∫ΔΨ ds + i∫Ψ dB + i∫g(Ψ) ds‖_{L²}` at trajectory index
/// `upto`, with `∫Ψ dB = Σ_p λ_p e_p ∫Ψ dβ_p` pointwise by Stieltjes quadrature.
pub fn classical_residual(p: &Problem, traj: &Trajectory, upto: usize, cfg: &FracConfig) -> Result<f64> {
    check_alignment(p, traj)?;
    let it = trajectory_integrator(p, traj, upto, cfg)?;
    let sp = &p.spectral;
    let times = &traj.times[..=upto];
    let size = p.field.torus().size();
    let laps: Vec<Vec<Complex64>> = (0..=upto).map(|k| sp.laplacian(&traj.states[k].values)).collect();
    let gs: Vec<WaveField> =
        (0..=upto).map(|k| p.nonlinearity.apply(sp, &traj.states[k])).collect::<Result<_>>()?;
    let paths = trajectory_paths(p, traj, upto);
    let profiles: Vec<&[f64]> = (0..p.field.mode_count()).map(|q| p.field.mode_profile(q)).collect();
    let i = Complex64::i();
    let pointwise: Vec<Complex64> = (0..size)
        .into_par_iter()
        .map(|x| -> Result<Complex64> {
            let psi_x: Vec<Complex64> = (0..=upto).map(|k| traj.states[k].values[x]).collect();
            let mut noise = Complex64::new(0.0, 0.0);
            for (q, prof) in profiles.iter().enumerate() {
                if prof[x] != 0.0 {
                    noise += it.integrate(&psi_x, &paths[q])? * prof[x];
                }
            }
            let lap_x: Vec<Complex64> = laps.iter().map(|l| l[x]).collect();
            let g_x: Vec<Complex64> = gs.iter().map(|g| g.values[x]).collect();
            Ok(psi_x[upto] - psi_x[0] - i * trapezoid(times, &lap_x) + i * noise + i * trapezoid(times, &g_x))
        })
        .collect::<Result<_>>()?;
    Ok(sp.l2_norm(&pointwise))
}

/// Structure-function Hölder exponent of `t ↦ Ψ(t)` in `H^order`.
pub fn trajectory_holder(sp: &Spectral, traj: &Trajectory, order: f64, window: LagWindow) -> Result<f64> {
    let h = uniform_spacing(&traj.times)
        .ok_or_else(|| Error::Estimation("Hölder estimation requires a uniform grid".into()))?;
    let coeffs: Vec<Vec<Complex64>> = traj.states.par_iter().map(|s| sp.forward(&s.values)).collect();
    let lags = window.lag_steps(traj.states.len() - 1);
    structure_exponent(traj.states.len(), h, &lags, |i, j| {
        let d: Vec<Complex64> = coeffs[j].iter().zip(&coeffs[i]).map(|(a, b)| a - b).collect();
        sp.sobolev_norm_coeffs(&d, order).powi(2)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fbm::uniform_grid;
    use crate::qnoise::NoiseSpectrum;
    use crate::spectral::Torus;
    use std::f64::consts::PI;

    fn torus() -> Torus {
        Torus::new(1, 64, 2.0 * PI).unwrap()
    }

    fn packet() -> WaveField {
        WaveField::gaussian_packet(torus(), 0.6, 2.0)
    }

    #[test]
    fn quiet_noise_is_free_evolution() {
        let field = NoiseField::quiet(torus(), &uniform_grid(1.0, 65), 0.75).unwrap();
        let p = Problem::new(&field, Nonlinearity::None).unwrap();
        let traj = solve_direct(&p, &packet(), 1.0 / 16.0, 1.0).unwrap();
        let mut free = packet();
        p.spectral.free_flow_in_place(&mut free.values, 1.0);
        assert!(traj.last().max_abs_diff(&free).unwrap() < 1e-12);
        assert_eq!(traj.len(), 17);
        assert_eq!(traj.provenance.route, "direct");
        assert_eq!(traj.provenance.config_hash.len(), 64);
    }

    #[test]
    fn constant_mode_closed_form() {
        let s = NoiseSpectrum::build(1, 2.0 * PI, 1, 7.0, 0).unwrap();
        let field = NoiseField::sample(&s, torus(), &uniform_grid(1.0, 513), 0.75, 5).unwrap();
        let p = Problem::new(&field, Nonlinearity::None).unwrap();
        let direct = solve_direct(&p, &packet(), 1.0 / 64.0, 1.0).unwrap();
        let mut exact = packet();
        p.spectral.free_flow_in_place(&mut exact.values, 1.0);
        let b = field.values(512);
        exact.apply_phase(&b, -1.0);
        assert!(direct.last().max_abs_diff(&exact).unwrap() < 1e-8);
        // Crank–Nicolson is not exact for the free flow; compare the strang route.
        let strang = solve_gauge(&p, &packet(), 1.0 / 64.0, 1.0, Scheme::StrangGauge).unwrap();
        assert!(strang.last().max_abs_diff(&direct.last().clone()).unwrap() < 1e-8);
        // Crank–Nicolson converges at second order.
        let err = |dt: f64| {
            let g = solve_gauge(&p, &packet(), dt, 1.0, Scheme::CrankNicolsonMag).unwrap();
            g.last().l2_distance(&exact).unwrap()
        };
        let (e1, e2) = (err(1.0 / 128.0), err(1.0 / 256.0));
        assert!(e1 / e2 > 3.5, "{e1} {e2}");
    }

    #[test]
    fn charge_is_conserved() {
        let s = NoiseSpectrum::build(1, 2.0 * PI, 9, 7.0, 0).unwrap();
        let field = NoiseField::sample(&s, torus(), &uniform_grid(0.5, 129), 0.75, 6).unwrap();
        let g = Nonlinearity::Power { sigma: 1.0, mu: -1.0 };
        let p = Problem::new(&field, g).unwrap();
        let traj = solve_direct(&p, &packet(), 1.0 / 256.0, 0.5).unwrap();
        let n0 = packet().l2_norm();
        for s in &traj.states {
            assert!((s.l2_norm() - n0).abs() < 1e-12 * n0);
        }
    }

    #[test]
    fn duhamel_without_nonlinearity() {
        let s = NoiseSpectrum::build(1, 2.0 * PI, 9, 7.0, 0).unwrap();
        let field = NoiseField::sample(&s, torus(), &uniform_grid(0.25, 65), 0.75, 8).unwrap();
        let p = Problem::new(&field, Nonlinearity::None).unwrap();
        let traj = solve_gauge(&p, &packet(), 1.0 / 128.0, 0.25, Scheme::CrankNicolsonMag).unwrap();
        let r = duhamel_residual(&p, &traj, Scheme::CrankNicolsonMag).unwrap();
        assert_eq!(r[0], 0.0);
        assert!(r.iter().all(|v| *v < 1e-10), "{r:?}");
    }

    #[test]
    fn step_plan_errors() {
        let field = NoiseField::quiet(torus(), &uniform_grid(1.0, 65), 0.75).unwrap();
        let p = Problem::new(&field, Nonlinearity::None).unwrap();
        assert!(solve_direct(&p, &packet(), 0.01, 1.0).is_err());
        assert!(solve_direct(&p, &packet(), 1.0 / 64.0, 1.5).is_err());
        assert!(solve_gauge(&p, &packet(), 1.0 / 64.0, 1.0, Scheme::CrankNicolsonMag).is_err());
    }

    #[test]
    fn weak_form_of_free_evolution() {
        let t = torus();
        let field = NoiseField::quiet(t, &uniform_grid(1.0, 257), 0.75).unwrap();
        let p = Problem::new(&field, Nonlinearity::None).unwrap();
        let traj = solve_direct(&p, &packet(), 1.0 / 256.0, 1.0).unwrap();
        let w = FourierTestFunction { torus: t, modes: vec![2], omega: 1.0 };
        let cfg = FracConfig::stochastic(0.4, 0.75).unwrap();
        let r = weak_form_residual(&p, &traj, &w, 256, &cfg).unwrap();
        assert!(r < 1e-4, "{r}");
        let zero = Trajectory { states: vec![WaveField::zeros(t); traj.len()], ..traj.clone() };
        assert_eq!(weak_form_residual(&p, &zero, &w, 256, &cfg).unwrap(), 0.0);
        let bad = FracConfig::new(0.1).unwrap();
        assert!(matches!(weak_form_residual(&p, &traj, &w, 256, &bad), Err(Error::Config(_))));
    }
}
