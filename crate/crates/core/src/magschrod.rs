//! Propagator for the gauge-transformed equation `∂_t φ = iΔ_B φ + f` with
//! the magnetic Laplacian `Δ_B = Δ − 2i∇B·∇ − |∇B|² − iΔB = e^{iB}Δe^{−iB}`.
//!
//! Two one-step schemes are provided:
//!
//! * [`Scheme::StrangGauge`] undoes the gauge, takes a Strang step of the
//!   free flow around the exact phase increment `e^{−iδB}`, and redoes the
//!   gauge: `φ₁ = e^{iB₁} K_{dt/2} e^{−i(B₁−B₀)} K_{dt/2} e^{−iB₀} φ₀`.
//! * [`Scheme::CrankNicolsonMag`] applies the implicit midpoint rule to
//!   `Δ_B` itself, frozen at the step midpoint. The first-order part is
//!   written in the skew form `∇B·∇ + ∇·(∇B ·)` with 2/3-rule projections,
//!   which is exactly skew-Hermitian on the grid, so the step is unitary up
//!   to the inner solver tolerance.

use num_complex::Complex64;

use crate::qnoise::{NoiseField, NoiseSnapshot};
use crate::spectral::Spectral;
use crate::wave::WaveField;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    StrangGauge,
    CrankNicolsonMag,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::StrangGauge => "strang_gauge",
            Scheme::CrankNicolsonMag => "crank_nicolson_mag",
        }
    }

    /// Noise-grid indices per step must be a multiple of this.
    pub fn stride_multiple(&self) -> usize {
        match self {
            Scheme::StrangGauge => 1,
            Scheme::CrankNicolsonMag => 2,
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strang_gauge" => Ok(Scheme::StrangGauge),
            "crank_nicolson_mag" => Ok(Scheme::CrankNicolsonMag),
            other => Err(Error::Config(format!(
                "unknown scheme {other:?}; expected strang_gauge or crank_nicolson_mag"
            ))),
        }
    }
}

/// Inner fixed-point solver settings for [`Scheme::CrankNicolsonMag`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Relative update size at which the iteration stops.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-13, max_iter: 200 }
    }
}

/// Time-dependent forcing `f(t)` added to the linear flow.
pub type Forcing<'a> = &'a (dyn Fn(f64) -> WaveField + Sync);

fn check_snapshot(sp: &Spectral, snap: &NoiseSnapshot, len: usize) -> Result<()> {
    let size = sp.torus().size();
    if len != size
        || snap.b.len() != size
        || snap.lap.len() != size
        || snap.grad.len() != sp.torus().dim
        || snap.grad.iter().any(|g| g.len() != size)
    {
        return Err(Error::shape(
            format!("fields on {size} grid points with {} gradient components", sp.torus().dim),
            format!("φ with {len} points, B with {}", snap.b.len()),
        ));
    }
    Ok(())
}

/// `P(∇B·∇Pφ)`, the dealiased advection term.
fn advection(sp: &Spectral, phi_hat_p: &[Complex64], grad: &[Vec<f64>]) -> Vec<Complex64> {
    let size = phi_hat_p.len();
    let mut acc = vec![Complex64::new(0.0, 0.0); size];
    for (axis, g) in grad.iter().enumerate() {
        let mut d = sp.derivative_coeffs(phi_hat_p, axis);
        sp.inverse_in_place(&mut d);
        for ((a, x), gb) in acc.iter_mut().zip(&d).zip(g) {
            *a += x * gb;
        }
    }
    sp.forward_in_place(&mut acc);
    sp.dealias_coeffs(&mut acc);
    sp.inverse_in_place(&mut acc);
    acc
}

/// `Δ_Bφ` in the literal expanded form `Δφ − 2i P(∇B·∇Pφ) − |∇B|²φ − iΔB φ`,
/// all derivatives spectral.
pub fn magnetic_laplacian_apply(sp: &Spectral, phi: &WaveField, snap: &NoiseSnapshot) -> Result<WaveField> {
    check_snapshot(sp, snap, phi.len())?;
    let mut hat = sp.forward(&phi.values);
    let lap = {
        let mut l: Vec<Complex64> = hat.iter().zip(sp.k2()).map(|(z, k2)| -z * k2).collect();
        sp.inverse_in_place(&mut l);
        l
    };
    sp.dealias_coeffs(&mut hat);
    let adv = advection(sp, &hat, &snap.grad);
    let i = Complex64::i();
    let values = (0..phi.len())
        .map(|x| {
            let g2: f64 = snap.grad.iter().map(|g| g[x] * g[x]).sum();
            lap[x] - 2.0 * i * adv[x] - g2 * phi.values[x] - i * snap.lap[x] * phi.values[x]
        })
        .collect();
    Ok(WaveField { torus: phi.torus, values })
}

/// `L φ = −i[P(∇B·∇Pφ) + ∇·P(∇B Pφ)] − |∇B|²φ`, the Hermitian grid form of
/// `Δ_B − Δ`.
fn magnetic_part_hermitian(sp: &Spectral, phi: &[Complex64], snap: &NoiseSnapshot) -> Vec<Complex64> {
    let size = phi.len();
    let mut hat = sp.forward(phi);
    sp.dealias_coeffs(&mut hat);
    let adv = advection(sp, &hat, &snap.grad);
    let phi_p = sp.inverse(&hat);
    let mut div = vec![Complex64::new(0.0, 0.0); size];
    for (axis, g) in snap.grad.iter().enumerate() {
        let mut v: Vec<Complex64> = phi_p.iter().zip(g).map(|(z, gb)| z * gb).collect();
        sp.forward_in_place(&mut v);
        sp.dealias_coeffs(&mut v);
        let d = sp.derivative_coeffs(&v, axis);
        div.iter_mut().zip(&d).for_each(|(a, b)| *a += b);
    }
    sp.inverse_in_place(&mut div);
    let i = Complex64::i();
    (0..size)
        .map(|x| {
            let g2: f64 = snap.grad.iter().map(|g| g[x] * g[x]).sum();
            -i * (adv[x] + div[x]) - g2 * phi[x]
        })
        .collect()
}

/// `Δ_Bφ` in the skew-symmetric form used by [`Scheme::CrankNicolsonMag`];
/// `Re(iΔ_Bφ, φ) = 0` holds for it to rounding.
pub fn magnetic_laplacian_hermitian(
    sp: &Spectral,
    phi: &WaveField,
    snap: &NoiseSnapshot,
) -> Result<WaveField> {
    check_snapshot(sp, snap, phi.len())?;
    let lap = sp.laplacian(&phi.values);
    let l = magnetic_part_hermitian(sp, &phi.values, snap);
    Ok(WaveField { torus: phi.torus, values: lap.iter().zip(&l).map(|(a, b)| a + b).collect() })
}

/// `‖Δ_Bφ − e^{iB}Δ(e^{−iB}φ)‖_{L²}` with `∇B`, `ΔB` taken spectrally from `b`.
pub fn gauge_conjugation_identity(sp: &Spectral, phi: &WaveField, b: &[f64]) -> Result<f64> {
    if b.len() != phi.len() || phi.len() != sp.torus().size() {
        return Err(Error::shape(sp.torus().size(), b.len()));
    }
    let snap = NoiseSnapshot { b: b.to_vec(), grad: sp.gradient_real(b), lap: sp.laplacian_real(b) };
    let lhs = magnetic_laplacian_apply(sp, phi, &snap)?;
    let mut u = phi.clone();
    u.apply_phase(b, -1.0);
    let mut rhs = WaveField { torus: phi.torus, values: sp.laplacian(&u.values) };
    rhs.apply_phase(b, 1.0);
    lhs.l2_distance(&rhs)
}

/// Stage data for one step between noise-grid indices `i` and `j`.
#[derive(Debug, Clone)]
pub struct PropagatorStep {
    pub scheme: Scheme,
    pub t: f64,
    pub dt: f64,
    /// Stage times with their noise snapshots.
    pub stages: Vec<(f64, NoiseSnapshot)>,
}

impl PropagatorStep {
    pub fn new(field: &NoiseField, i: usize, j: usize, scheme: Scheme) -> Result<Self> {
        let times = field.times();
        if !(i < j && j < times.len()) {
            return Err(Error::Domain(format!(
                "step indices ({i}, {j}) do not fit a noise grid of {} times",
                times.len()
            )));
        }
        let (t, dt) = (times[i], times[j] - times[i]);
        let stages = match scheme {
            Scheme::StrangGauge => vec![(times[i], values_only(field, i)), (times[j], values_only(field, j))],
            Scheme::CrankNicolsonMag => {
                if !(j - i).is_multiple_of(2) {
                    return Err(Error::Domain(format!(
                        "crank_nicolson_mag needs the step midpoint on the noise grid; \
                         indices ({i}, {j}) have none"
                    )));
                }
                let m = (i + j) / 2;
                vec![(times[m], field.snapshot(m))]
            }
        };
        Ok(Self { scheme, t, dt, stages })
    }
}

fn values_only(field: &NoiseField, k: usize) -> NoiseSnapshot {
    NoiseSnapshot { b: field.values(k), grad: Vec::new(), lap: Vec::new() }
}

/// One-step propagator on a fixed torus.
#[derive(Debug, Clone)]
pub struct MagneticPropagator {
    sp: Spectral,
    pub scheme: Scheme,
    pub options: SolverOptions,
}

impl MagneticPropagator {
    pub fn new(sp: Spectral, scheme: Scheme) -> Self {
        Self { sp, scheme, options: SolverOptions::default() }
    }

    pub fn spectral(&self) -> &Spectral {
        &self.sp
    }

    fn check(&self, phi: &WaveField, field: &NoiseField) -> Result<()> {
        if phi.torus != *self.sp.torus() || field.torus() != self.sp.torus() {
            return Err(Error::shape(
                format!("{:?}", self.sp.torus()),
                format!("φ on {:?}, noise on {:?}", phi.torus, field.torus()),
            ));
        }
        Ok(())
    }

    /// `U(t+dt, t)φ` plus the forcing contribution, between noise indices.
    pub fn step_indices(
        &self,
        phi: &WaveField,
        field: &NoiseField,
        i: usize,
        j: usize,
        forcing: Option<Forcing>,
    ) -> Result<WaveField> {
        self.check(phi, field)?;
        let step = PropagatorStep::new(field, i, j, self.scheme)?;
        self.apply(&step, phi, forcing)
    }

    /// `propagate(φ, t, dt)`: looks up `t` and `t + dt` on the noise grid.
    pub fn propagate(
        &self,
        phi: &WaveField,
        t: f64,
        dt: f64,
        field: &NoiseField,
        forcing: Option<Forcing>,
    ) -> Result<WaveField> {
        if !(dt > 0.0) {
            return Err(Error::Domain(format!("time step must be positive, got {dt}")));
        }
        let lookup = |s: f64| {
            field
                .index_of(s)
                .ok_or_else(|| Error::Domain(format!("stage time {s} is not on the noise time grid")))
        };
        let (i, j) = (lookup(t)?, lookup(t + dt)?);
        self.step_indices(phi, field, i, j, forcing)
    }

    pub fn apply(
        &self,
        step: &PropagatorStep,
        phi: &WaveField,
        forcing: Option<Forcing>,
    ) -> Result<WaveField> {
        let out = match step.scheme {
            Scheme::StrangGauge => self.strang(step, phi, forcing),
            Scheme::CrankNicolsonMag => self.crank_nicolson(step, phi, forcing)?,
        };
        if !out.is_finite() {
            return Err(Error::Numerical(format!(
                "{} step from t = {} produced non-finite values",
                step.scheme.name(),
                step.t
            )));
        }
        Ok(out)
    }

    fn strang_linear(&self, b0: &[f64], b1: &[f64], dt: f64, phi: &WaveField) -> WaveField {
        let mut u = phi.clone();
        u.apply_phase(b0, -1.0);
        self.sp.free_flow_in_place(&mut u.values, 0.5 * dt);
        for ((z, x0), x1) in u.values.iter_mut().zip(b0).zip(b1) {
            *z *= Complex64::from_polar(1.0, -(x1 - x0));
        }
        self.sp.free_flow_in_place(&mut u.values, 0.5 * dt);
        u.apply_phase(b1, 1.0);
        u
    }

    fn strang(&self, step: &PropagatorStep, phi: &WaveField, forcing: Option<Forcing>) -> WaveField {
        let (b0, b1) = (&step.stages[0].1.b, &step.stages[1].1.b);
        let dt = step.dt;
        match forcing {
            None => self.strang_linear(b0, b1, dt, phi),
            Some(f) => {
                // Trapezoid Duhamel: S(φ + dt/2·f(t)) + dt/2·f(t+dt).
                let mut start = phi.clone();
                start
                    .axpy(Complex64::new(0.5 * dt, 0.0), &f(step.t))
                    .expect("forcing on the propagator grid");
                let mut out = self.strang_linear(b0, b1, dt, &start);
                out.axpy(Complex64::new(0.5 * dt, 0.0), &f(step.t + dt))
                    .expect("forcing on the propagator grid");
                out
            }
        }
    }

    fn crank_nicolson(
        &self,
        step: &PropagatorStep,
        phi: &WaveField,
        forcing: Option<Forcing>,
    ) -> Result<WaveField> {
        let (tm, snap) = (&step.stages[0].0, &step.stages[0].1);
        check_snapshot(&self.sp, snap, phi.len())?;
        let sp = &self.sp;
        let half = Complex64::new(0.0, 0.5 * step.dt);
        let inv: Vec<Complex64> = sp.k2().iter().map(|k2| 1.0 / (1.0 + half * k2)).collect();
        let solve = |w: &mut Vec<Complex64>| {
            sp.forward_in_place(w);
            w.iter_mut().zip(&inv).for_each(|(z, d)| *z *= d);
            sp.inverse_in_place(w);
        };

        let magnetic = !snap.is_spatially_constant();
        let lap0 = sp.laplacian(&phi.values);
        let mut rhs: Vec<Complex64> = phi.values.iter().zip(&lap0).map(|(p, l)| p + half * l).collect();
        if magnetic {
            let l0 = magnetic_part_hermitian(sp, &phi.values, snap);
            rhs.iter_mut().zip(&l0).for_each(|(r, l)| *r += half * l);
        }
        if let Some(f) = forcing {
            let fm = f(*tm);
            fm.check_same_grid(phi)?;
            rhs.iter_mut().zip(&fm.values).for_each(|(r, v)| *r += step.dt * v);
        }

        let mut current = rhs.clone();
        solve(&mut current);
        if !magnetic {
            return Ok(WaveField { torus: phi.torus, values: current });
        }
        let mut update = f64::INFINITY;
        for _ in 0..self.options.max_iter {
            let l = magnetic_part_hermitian(sp, &current, snap);
            let mut next: Vec<Complex64> = rhs.iter().zip(&l).map(|(r, x)| r + half * x).collect();
            solve(&mut next);
            let diff: f64 = next.iter().zip(&current).map(|(a, b)| (a - b).norm_sqr()).sum();
            let norm: f64 = next.iter().map(|a| a.norm_sqr()).sum();
            update = (diff / norm.max(f64::MIN_POSITIVE)).sqrt();
            current = next;
            if update <= self.options.tol {
                return Ok(WaveField { torus: phi.torus, values: current });
            }
        }
        Err(Error::NoConvergence { iterations: self.options.max_iter, residual: update })
    }

    /// States at noise indices `start, start+stride, …, end`.
    pub fn evolve(
        &self,
        phi0: &WaveField,
        field: &NoiseField,
        start: usize,
        end: usize,
        stride: usize,
        forcing: Option<Forcing>,
    ) -> Result<Vec<WaveField>> {
        self.check(phi0, field)?;
        if stride == 0 || end <= start || !(end - start).is_multiple_of(stride) {
            return Err(Error::Domain(format!(
                "stride {stride} does not tile the index range [{start}, {end}]"
            )));
        }
        if !stride.is_multiple_of(self.scheme.stride_multiple()) {
            return Err(Error::Domain(format!(
                "{} needs an even noise-index stride, got {stride}",
                self.scheme.name()
            )));
        }
        if end >= field.times().len() {
            return Err(Error::Domain(format!(
                "end index {end} is beyond the noise grid of {} times",
                field.times().len()
            )));
        }
        let mut out = Vec::with_capacity((end - start) / stride + 1);
        out.push(phi0.clone());
        let mut k = start;
        while k < end {
            let next = self.step_indices(out.last().expect("nonempty"), field, k, k + stride, forcing)?;
            out.push(next);
            k += stride;
        }
        Ok(out)
    }
}

/// Largest observed `‖u(t)‖_{H^q} / (‖u(0)‖_{H^q} + ∫_0^t ‖f‖_{H^q})` along a
/// trajectory, the forcing integral by the trapezoid rule.
pub fn apriori_constant(
    sp: &Spectral,
    states: &[WaveField],
    times: &[f64],
    forcing: Option<Forcing>,
    q: f64,
) -> Result<f64> {
    if states.len() != times.len() || states.is_empty() {
        return Err(Error::shape(times.len(), states.len()));
    }
    let v = sp.sobolev_norm(&states[0].values, q)?;
    let fnorm = |t: f64| -> Result<f64> {
        match forcing {
            Some(f) => sp.sobolev_norm(&f(t).values, q),
            None => Ok(0.0),
        }
    };
    let mut integral = 0.0;
    let mut prev = fnorm(times[0])?;
    let mut best: f64 = 0.0;
    for k in 0..states.len() {
        if k > 0 {
            let cur = fnorm(times[k])?;
            integral += 0.5 * (prev + cur) * (times[k] - times[k - 1]);
            prev = cur;
        }
        let denom = v + integral;
        if denom > 0.0 {
            best = best.max(sp.sobolev_norm(&states[k].values, q)? / denom);
        }
    }
    Ok(best)
}
