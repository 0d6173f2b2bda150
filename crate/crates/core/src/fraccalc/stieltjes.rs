//! Generalized Stieltjes integral `∫ f dg = −∫ D^α_{a+}f(s) · D^{1−α}_{T−}g_{T−}(s) ds`.
//!
//! For the piecewise-linear interpolants both derivatives have closed forms
//! in Riemann–Liouville form:
//!
//! * `D^α_{a+}f(s) = f(a)(s−a)^{−α}/Γ(1−α) + L(s)` with
//!   `L(s) = Σ_k m_k φ_k(s)/Γ(2−α)`, `φ_k(s) = (s−t_k)_+^{1−α} − (s−t_{k+1})_+^{1−α}`,
//! * `D^{1−α}_{T−}g_{T−}(s) = R(s) = −Σ_k m_k ψ_k(s)/Γ(1+α)`,
//!   `ψ_k(s) = (t_{k+1}−s)_+^α − (t_k−s)_+^α`,
//!
//! where `m_k` are the cell slopes. On each grid cell the kernels of the
//! [`NEAR_CELLS`] nearest cells (and the `(s−a)^{−α}` term on the first
//! cells) have power-type endpoint singularities. These singular parts are
//! integrated exactly: against each other by a graded rule, and against the
//! smooth remainder by closed-form sub-cell integrals. Smooth-by-smooth
//! products use midpoint sub-cells. Resolving the singular parts matters
//! for rough pairs: the local error is proportional to products of nearby
//! slopes of `f` and `g`, which do not average out when the two are correlated.
//! What remains is a clean `O(r^{−2})` midpoint error, removed by Richardson
//! extrapolation between `r` and `2r` sub-cells. On uniform grids `L` and `R`
//! at the sub-cell midpoints are discrete convolutions, evaluated by FFT.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use super::{gamma, FracConfig, Sample, SampledFunction};
use crate::fbm::uniform_spacing;
use crate::{Error, Result};

/// Neighbouring cells whose kernels are treated as singular on a cell.
pub const NEAR_CELLS: usize = 3;

/// Panels of the graded Simpson rule.
const GRADED_PANELS: usize = 512;

fn pos(x: f64, e: f64) -> f64 {
    if x > 0.0 {
        x.powf(e)
    } else {
        0.0
    }
}

/// `∫_lo^hi f` after the map `u = v⁸/(v⁸ + (1−v)⁸)`, which flattens
/// power-type endpoint singularities.
fn graded_integral(lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let n = GRADED_PANELS;
    let g = |v: f64| {
        let (a, b) = (v.powi(8), (1.0 - v).powi(8));
        let d = a + b;
        let du = 8.0 * (v * (1.0 - v)).powi(7) / (d * d);
        if du == 0.0 {
            0.0
        } else {
            f(lo + (hi - lo) * a / d) * du
        }
    };
    let hv = 1.0 / n as f64;
    let mut acc = g(0.0) + g(1.0);
    for j in 1..n {
        acc += g(j as f64 * hv) * if j % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * hv / 3.0 * (hi - lo)
}

/// Quadrature data for one outer cell `i`. Offsets index `k = i − a` for the
/// left kernels and `l = i + b` for the right ones; entries for offsets
/// outside the grid are zero and never used.
#[derive(Debug, Clone)]
struct CellRule {
    /// `φ_{i−a}` at the sub-cell midpoints, `[a][j]`.
    phi_mid: Vec<Vec<f64>>,
    /// `∫_{sub j} φ_{i−a}`.
    phi_sub: Vec<Vec<f64>>,
    psi_mid: Vec<Vec<f64>>,
    psi_sub: Vec<Vec<f64>>,
    /// `∫_cell φ_{i−a} ψ_{i+b}`, `[a][b]`.
    pair: Vec<Vec<f64>>,
    /// The `(s−a)^{−α}` term, present on the first `NEAR_CELLS + 1` cells.
    w: Option<WeightRule>,
}

#[derive(Debug, Clone)]
struct WeightRule {
    mid: Vec<f64>,
    sub: Vec<f64>,
    /// `∫_cell (s−a)^{−α} ψ_{i+b}`.
    pair: Vec<f64>,
}

impl CellRule {
    fn build(t: &[f64], i: usize, alpha: f64, r: usize) -> Self {
        let cells = t.len() - 1;
        let (lo, hi) = (t[i], t[i + 1]);
        let hs = (hi - lo) / r as f64;
        let mids: Vec<f64> = (0..r).map(|j| lo + (j as f64 + 0.5) * hs).collect();
        let edges: Vec<f64> = (0..=r).map(|j| lo + j as f64 * hs).collect();
        let phi = |k: usize, s: f64| pos(s - t[k], 1.0 - alpha) - pos(s - t[k + 1], 1.0 - alpha);
        let phi_int =
            |k: usize, s: f64| (pos(s - t[k], 2.0 - alpha) - pos(s - t[k + 1], 2.0 - alpha)) / (2.0 - alpha);
        let psi = |l: usize, s: f64| pos(t[l + 1] - s, alpha) - pos(t[l] - s, alpha);
        let psi_int =
            |l: usize, s: f64| -(pos(t[l + 1] - s, 1.0 + alpha) - pos(t[l] - s, 1.0 + alpha)) / (1.0 + alpha);
        let left = |a: usize| (a <= i).then(|| i - a);
        let right = |b: usize| (i + b < cells).then_some(i + b);
        let table = |idx: &dyn Fn(usize) -> Option<usize>, f: &dyn Fn(usize, f64) -> f64| {
            (0..=NEAR_CELLS)
                .map(|o| match idx(o) {
                    Some(k) => mids.iter().map(|&s| f(k, s)).collect(),
                    None => vec![0.0; r],
                })
                .collect::<Vec<Vec<f64>>>()
        };
        let sub_table = |idx: &dyn Fn(usize) -> Option<usize>, f: &dyn Fn(usize, f64) -> f64| {
            (0..=NEAR_CELLS)
                .map(|o| match idx(o) {
                    Some(k) => edges.windows(2).map(|e| f(k, e[1]) - f(k, e[0])).collect(),
                    None => vec![0.0; r],
                })
                .collect::<Vec<Vec<f64>>>()
        };
        let pair = (0..=NEAR_CELLS)
            .map(|a| {
                (0..=NEAR_CELLS)
                    .map(|b| match (left(a), right(b)) {
                        (Some(k), Some(l)) => graded_integral(lo, hi, |s| phi(k, s) * psi(l, s)),
                        _ => 0.0,
                    })
                    .collect()
            })
            .collect();
        let w = (i <= NEAR_CELLS).then(|| {
            let a0 = t[0];
            let wf = |s: f64| (s - a0).powf(-alpha);
            let wi = |s: f64| (s - a0).powf(1.0 - alpha) / (1.0 - alpha);
            WeightRule {
                mid: mids.iter().map(|&s| wf(s)).collect(),
                sub: edges.windows(2).map(|e| wi(e[1]) - wi(e[0])).collect(),
                pair: (0..=NEAR_CELLS)
                    .map(|b| match right(b) {
                        Some(l) => graded_integral(lo, hi, |s| wf(s) * psi(l, s)),
                        None => 0.0,
                    })
                    .collect(),
            }
        });
        Self {
            phi_mid: table(&left, &phi),
            phi_sub: sub_table(&left, &phi_int),
            psi_mid: table(&right, &psi),
            psi_sub: sub_table(&right, &psi_int),
            pair,
            w,
        }
    }

    /// Rescale a rule built on the unit grid to spacing `h`.
    fn scaled(mut self, h: f64, alpha: f64) -> Self {
        let scale = |v: &mut Vec<Vec<f64>>, c: f64| v.iter_mut().flatten().for_each(|x| *x *= c);
        scale(&mut self.phi_mid, h.powf(1.0 - alpha));
        scale(&mut self.phi_sub, h.powf(2.0 - alpha));
        scale(&mut self.psi_mid, h.powf(alpha));
        scale(&mut self.psi_sub, h.powf(1.0 + alpha));
        scale(&mut self.pair, h * h);
        if let Some(w) = &mut self.w {
            w.mid.iter_mut().for_each(|x| *x *= h.powf(-alpha));
            w.sub.iter_mut().for_each(|x| *x *= h.powf(1.0 - alpha));
            w.pair.iter_mut().for_each(|x| *x *= h);
        }
        self
    }
}

struct UniformKernels {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Sub-cell levels `r` and `2r`.
    levels: [UniformLevel; 2],
}

struct UniformLevel {
    refinement: usize,
    /// FFTs of the zero-padded left kernels, one per sub-cell offset.
    left: Vec<Vec<Complex64>>,
    /// FFTs of the zero-padded right kernels, one per sub-cell offset.
    right: Vec<Vec<Complex64>>,
    /// Rules for cells `0..=NEAR_CELLS`, then one for every later cell.
    rules: Vec<CellRule>,
}

/// Reusable Stieltjes quadrature for one time grid and configuration.
pub struct StieltjesIntegrator {
    times: Vec<f64>,
    cfg: FracConfig,
    uniform: Option<UniformKernels>,
}

impl std::fmt::Debug for StieltjesIntegrator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StieltjesIntegrator")
            .field("len", &self.times.len())
            .field("cfg", &self.cfg)
            .field("uniform", &self.uniform.is_some())
            .finish()
    }
}

impl StieltjesIntegrator {
    /// Uses the FFT path when `times` is uniform.
    pub fn new(times: &[f64], cfg: FracConfig) -> Result<Self> {
        let mut it = Self::direct(times, cfg)?;
        if let Some(h) = uniform_spacing(times) {
            it.uniform = Some(build_kernels(times.len() - 1, h, &cfg));
        }
        Ok(it)
    }

    /// Evaluates `L` and `R` by direct summation (`O(M²)`) and builds the
    /// cell rules per cell.
    pub fn direct(times: &[f64], cfg: FracConfig) -> Result<Self> {
        cfg.validate()?;
        SampledFunction::new(times.to_vec(), vec![0.0; times.len()])?;
        let cells = times.len() - 1;
        let excised = cfg.excised();
        if 2 * excised >= cells {
            return Err(Error::Config(format!(
                "cutoff excising {excised} cells at each end leaves nothing of a {cells}-cell grid"
            )));
        }
        Ok(Self { times: times.to_vec(), cfg, uniform: None })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn config(&self) -> &FracConfig {
        &self.cfg
    }

    /// `∫ f dg` for values sampled on this integrator's grid.
    pub fn integrate<T: Sample>(&self, f: &[T], g: &[f64]) -> Result<T> {
        let n = self.times.len();
        if f.len() != n || g.len() != n {
            return Err(Error::shape(n, if f.len() != n { f.len() } else { g.len() }));
        }
        let mf: Vec<Complex64> = (0..n - 1)
            .map(|k| (f[k + 1] - f[k]).to_complex() / (self.times[k + 1] - self.times[k]))
            .collect();
        let mg: Vec<f64> =
            (0..n - 1).map(|k| (g[k + 1] - g[k]) / (self.times[k + 1] - self.times[k])).collect();
        // Over the whole interval the `f(a)` term is exact:
        // `∫_a^t (s−a)^{−α}(t−s)^α ds = (t−a)Γ(1−α)Γ(1+α)`, so it contributes
        // `f(a)(g(T) − g(a))`. The excision cutoff integrates it by quadrature.
        let (f0, exact) = if self.cfg.excised() == 0 {
            (Complex64::new(0.0, 0.0), f[0].to_complex() * (g[n - 1] - g[0]))
        } else {
            (f[0].to_complex(), Complex64::new(0.0, 0.0))
        };
        let r = self.cfg.refinement;
        let [coarse, fine] = match &self.uniform {
            Some(k) => [0, 1].map(|l| self.integrate_uniform(k, &k.levels[l], f0, &mf, &mg)),
            None => [r, 2 * r].map(|q| self.integrate_direct(q, f0, &mf, &mg)),
        };
        let value = (fine * 4.0 - coarse) / 3.0 + exact;
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(Error::Numerical(format!(
                "Stieltjes quadrature produced a non-finite value with cutoff {:?}",
                self.cfg.cutoff
            )));
        }
        Ok(T::from_complex(value))
    }

    fn outer_cells(&self) -> std::ops::Range<usize> {
        let cells = self.times.len() - 1;
        let x = self.cfg.excised();
        x..cells - x
    }

    /// `∫_cell D^α f · D^{1−α} g` on cell `i`, given `L` (slope part only)
    /// and `R` at the sub-cell midpoints.
    #[allow(clippy::too_many_arguments)]
    fn assemble_cell(
        &self,
        rule: &CellRule,
        i: usize,
        f0: Complex64,
        mf: &[Complex64],
        mg: &[f64],
        lmid: &[Complex64],
        rmid: &[f64],
    ) -> Complex64 {
        let alpha = self.cfg.alpha;
        let r = lmid.len();
        let cl = 1.0 / gamma(2.0 - alpha);
        let cr = -1.0 / gamma(1.0 + alpha);
        let cw = 1.0 / gamma(1.0 - alpha);
        let hs = (self.times[i + 1] - self.times[i]) / r as f64;
        let na = NEAR_CELLS.min(i);
        let nb = NEAR_CELLS.min(mg.len() - 1 - i);

        let mut sing_pair = Complex64::new(0.0, 0.0);
        for a in 0..=na {
            for b in 0..=nb {
                sing_pair += mf[i - a] * (mg[i + b] * rule.pair[a][b]);
            }
        }
        sing_pair *= cl * cr;
        if let Some(w) = &rule.w {
            let s: f64 = (0..=nb).map(|b| mg[i + b] * w.pair[b]).sum();
            sing_pair += f0 * (cw * cr * s);
        }

        let mut total = sing_pair;
        for j in 0..r {
            let mut l_sing = Complex64::new(0.0, 0.0);
            let mut l_sing_sub = Complex64::new(0.0, 0.0);
            for a in 0..=na {
                l_sing += mf[i - a] * rule.phi_mid[a][j];
                l_sing_sub += mf[i - a] * rule.phi_sub[a][j];
            }
            l_sing *= cl;
            l_sing_sub *= cl;
            let mut r_sing = 0.0;
            let mut r_sing_sub = 0.0;
            for b in 0..=nb {
                r_sing += mg[i + b] * rule.psi_mid[b][j];
                r_sing_sub += mg[i + b] * rule.psi_sub[b][j];
            }
            r_sing *= cr;
            r_sing_sub *= cr;

            let (w_mid, w_sub) = match &rule.w {
                Some(w) => (0.0, f0 * (cw * w.sub[j])),
                None => {
                    let s = self.times[i] + (j as f64 + 0.5) * hs - self.times[0];
                    (cw * s.powf(-alpha), Complex64::new(0.0, 0.0))
                }
            };
            l_sing_sub += w_sub;
            let l_smooth = lmid[j] * cl - l_sing + f0 * w_mid;
            let r_smooth = rmid[j] * cr - r_sing;
            total += l_sing_sub * r_smooth + l_smooth * (r_sing_sub + r_smooth * hs);
        }
        -total
    }

    fn integrate_direct(&self, r: usize, f0: Complex64, mf: &[Complex64], mg: &[f64]) -> Complex64 {
        let alpha = self.cfg.alpha;
        let t = &self.times;
        let parts: Vec<Complex64> = self
            .outer_cells()
            .into_par_iter()
            .map(|i| {
                let hs = (t[i + 1] - t[i]) / r as f64;
                let mut lmid = vec![Complex64::new(0.0, 0.0); r];
                let mut rmid = vec![0.0; r];
                for j in 0..r {
                    let s = t[i] + (j as f64 + 0.5) * hs;
                    for k in 0..=i {
                        lmid[j] += mf[k] * (pos(s - t[k], 1.0 - alpha) - pos(s - t[k + 1], 1.0 - alpha));
                    }
                    for (l, m) in mg.iter().enumerate().skip(i) {
                        rmid[j] += m * (pos(t[l + 1] - s, alpha) - pos(t[l] - s, alpha));
                    }
                }
                let rule = CellRule::build(t, i, alpha, r);
                self.assemble_cell(&rule, i, f0, mf, mg, &lmid, &rmid)
            })
            .collect();
        parts.into_iter().sum()
    }

    fn integrate_uniform(
        &self,
        k: &UniformKernels,
        level: &UniformLevel,
        f0: Complex64,
        mf: &[Complex64],
        mg: &[f64],
    ) -> Complex64 {
        let alpha = self.cfg.alpha;
        let r = level.refinement;
        let n = mf.len();
        let size = level.left[0].len();
        let h = self.times[1] - self.times[0];
        let norm = 1.0 / size as f64;
        let (lscale, rscale) = (norm * h.powf(1.0 - alpha), norm * h.powf(alpha));

        let mut fhat = vec![Complex64::new(0.0, 0.0); size];
        fhat[..n].copy_from_slice(mf);
        k.forward.process(&mut fhat);
        let mut ghat = vec![Complex64::new(0.0, 0.0); size];
        for (d, v) in mg.iter().rev().enumerate() {
            ghat[d] = Complex64::new(*v, 0.0);
        }
        k.forward.process(&mut ghat);

        // lmid[i * r + j], rmid[i * r + j].
        let mut lmid = vec![Complex64::new(0.0, 0.0); n * r];
        let mut rmid = vec![0.0; n * r];
        let mut lbuf = vec![Complex64::new(0.0, 0.0); size];
        let mut rbuf = vec![Complex64::new(0.0, 0.0); size];
        for j in 0..r {
            for ((o, x), y) in lbuf.iter_mut().zip(&fhat).zip(&level.left[j]) {
                *o = x * y;
            }
            for ((o, x), y) in rbuf.iter_mut().zip(&ghat).zip(&level.right[j]) {
                *o = x * y;
            }
            k.inverse.process(&mut lbuf);
            k.inverse.process(&mut rbuf);
            for i in 0..n {
                lmid[i * r + j] = lbuf[i] * lscale;
                rmid[i * r + j] = rbuf[n - 1 - i].re * rscale;
            }
        }
        self.outer_cells()
            .map(|i| {
                let rule = &level.rules[i.min(NEAR_CELLS + 1)];
                self.assemble_cell(rule, i, f0, mf, mg, &lmid[i * r..(i + 1) * r], &rmid[i * r..(i + 1) * r])
            })
            .sum()
    }
}

fn build_kernels(n: usize, h: f64, cfg: &FracConfig) -> UniformKernels {
    let size = (2 * n).next_power_of_two();
    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(size);
    let inverse = planner.plan_fft_inverse(size);
    let levels =
        [cfg.refinement, 2 * cfg.refinement].map(|r| build_level(n, h, cfg.alpha, r, size, forward.as_ref()));
    UniformKernels { forward, inverse, levels }
}

fn build_level(n: usize, h: f64, alpha: f64, r: usize, size: usize, forward: &dyn Fft<f64>) -> UniformLevel {
    let mut left = Vec::with_capacity(r);
    let mut right = Vec::with_capacity(r);
    for j in 0..r {
        let delta = (j as f64 + 0.5) / r as f64;
        let mut a = vec![Complex64::new(0.0, 0.0); size];
        let mut b = vec![Complex64::new(0.0, 0.0); size];
        for d in 0..n {
            let x = d as f64;
            a[d] = Complex64::new(pos(x + delta, 1.0 - alpha) - pos(x - 1.0 + delta, 1.0 - alpha), 0.0);
            b[d] = Complex64::new(pos(x + 1.0 - delta, alpha) - pos(x - delta, alpha), 0.0);
        }
        forward.process(&mut a);
        forward.process(&mut b);
        left.push(a);
        right.push(b);
    }
    // Unit grid long enough that the interior rule sees every offset.
    let unit: Vec<f64> = (0..=(n.min(2 * NEAR_CELLS + 2))).map(|j| j as f64).collect();
    let rules = (0..=NEAR_CELLS + 1)
        .map(|i| CellRule::build(&unit, i.min(unit.len() - 2), alpha, r).scaled(h, alpha))
        .collect();
    UniformLevel { refinement: r, left, right, rules }
}

fn check_common_grid<T: Sample>(f: &SampledFunction<T>, g: &SampledFunction<f64>) -> Result<()> {
    let tol = 1e-12 * (f.end() - f.start()).abs().max(1.0);
    if f.len() != g.len() || f.times().iter().zip(g.times()).any(|(a, b)| (a - b).abs() > tol) {
        return Err(Error::Domain("integrand and integrator must share a time grid".into()));
    }
    Ok(())
}

/// Generalized Stieltjes integral `∫_a^T f dg` by fractional derivatives.
pub fn stieltjes_integral<T: Sample>(
    f: &SampledFunction<T>,
    g: &SampledFunction<f64>,
    cfg: &FracConfig,
) -> Result<T> {
    check_common_grid(f, g)?;
    StieltjesIntegrator::new(f.times(), *cfg)?.integrate(f.values(), g.values())
}

/// Symmetric Riemann–Stieltjes sum `Σ_k ½(f(t_k) + f(t_{k+1}))(g(t_{k+1}) − g(t_k))`.
/// For `H > ½` every tag choice converges to the same Young integral; the
/// symmetric one is second order for smooth data.
pub fn young_riemann<T: Sample>(f: &SampledFunction<T>, g: &SampledFunction<f64>) -> Result<T> {
    check_common_grid(f, g)?;
    let fv = f.values();
    let gv = g.values();
    let mut acc = T::default();
    for k in 0..fv.len() - 1 {
        acc += (fv[k] + fv[k + 1]) * (0.5 * (gv[k + 1] - gv[k]));
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fbm::{sample_fbm, uniform_grid, FbmMethod};
    use crate::fraccalc::CutoffPolicy;

    fn cfg(alpha: f64) -> FracConfig {
        FracConfig::new(alpha).unwrap()
    }

    #[test]
    fn constant_integrand_gives_increment() {
        let times = uniform_grid(1.0, 513);
        let f = SampledFunction::from_fn(&times, |_| 1.0).unwrap();
        let g = SampledFunction::from_fn(&times, |t| (3.0 * t).sin() + t).unwrap();
        let v = stieltjes_integral(&f, &g, &cfg(0.4)).unwrap();
        let expect = g.values()[512] - g.values()[0];
        assert!((v - expect).abs() < 1e-5, "{v} vs {expect}");
    }

    #[test]
    fn identity_against_identity() {
        let times = uniform_grid(1.0, 257);
        let f = SampledFunction::from_fn(&times, |_| 1.0).unwrap();
        let g = SampledFunction::from_fn(&times, |t| t).unwrap();
        let v = stieltjes_integral(&f, &g, &cfg(0.3)).unwrap();
        assert!((v - 1.0).abs() < 1e-5, "{v}");
    }

    #[test]
    fn classical_pair() {
        let times = uniform_grid(1.0, 4097);
        let f = SampledFunction::from_fn(&times, |t| t).unwrap();
        let g = SampledFunction::from_fn(&times, |t| t * t).unwrap();
        let v = stieltjes_integral(&f, &g, &cfg(0.4)).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-4, "{v}");
        let y = young_riemann(&f, &g).unwrap();
        assert!((y - 2.0 / 3.0).abs() < 1e-3, "{y}");
    }

    #[test]
    fn fft_path_matches_direct_sum() {
        let times = uniform_grid(2.0, 301);
        let path = sample_fbm(0.75, &times, 4, FbmMethod::Cholesky).unwrap();
        let g = SampledFunction::new(times.clone(), path.values).unwrap();
        let f = SampledFunction::from_fn(&times, |t| Complex64::new(t.cos(), t * t)).unwrap();
        let c = cfg(0.35);
        let fast = StieltjesIntegrator::new(&times, c).unwrap();
        let slow = StieltjesIntegrator::direct(&times, c).unwrap();
        let a: Complex64 = fast.integrate(f.values(), g.values()).unwrap();
        let b: Complex64 = slow.integrate(f.values(), g.values()).unwrap();
        assert!((a - b).norm() < 1e-11 * b.norm().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn nonuniform_grid_matches_classical_value() {
        let times: Vec<f64> = (0..=400).map(|k| (k as f64 / 400.0).powf(1.3)).collect();
        let f = SampledFunction::from_fn(&times, |t| t).unwrap();
        let g = SampledFunction::from_fn(&times, |t| t * t).unwrap();
        let v = stieltjes_integral(&f, &g, &cfg(0.4)).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-4, "{v}");
    }

    #[test]
    fn excision_too_large_is_reported() {
        let times = uniform_grid(1.0, 9);
        let c = cfg(0.4).with_cutoff(CutoffPolicy::Excise { cells: 4 });
        let err = StieltjesIntegrator::new(&times, c).unwrap_err();
        assert!(err.to_string().contains("excising 4 cells"));
    }

    #[test]
    fn riemann_is_antisymmetric() {
        let times = uniform_grid(1.0, 33);
        let f = SampledFunction::from_fn(&times, |t| t.exp()).unwrap();
        let g = SampledFunction::from_fn(&times, |t| t.sin()).unwrap();
        let ng = g.map(|v: f64| -v);
        assert_eq!(young_riemann(&f, &g).unwrap(), -young_riemann(&f, &ng).unwrap());
    }

    #[test]
    fn singular_pairs_have_closed_forms() {
        let t: Vec<f64> = (0..=8).map(|j| j as f64).collect();
        for a in [0.3, 0.4, 0.45] {
            let beta = |x: f64, y: f64| gamma(x) * gamma(y) / gamma(x + y);
            let first = CellRule::build(&t, 0, a, 4);
            let w = first.w.as_ref().unwrap();
            assert!((first.pair[0][0] - beta(2.0 - a, 1.0 + a)).abs() < 1e-11);
            assert!((w.pair[0] - beta(1.0 - a, 1.0 + a)).abs() < 1e-11);
            let sub: f64 = first.phi_sub[0].iter().sum();
            assert!((sub - 1.0 / (2.0 - a)).abs() < 1e-14);
            assert!(CellRule::build(&t, 4, a, 4).w.is_none());
        }
    }

    #[test]
    fn rough_pair_matches_symmetric_sum() {
        // Both routes integrate the same piecewise-linear interpolants, so
        // they agree up to the far-pair quadrature error.
        let times = uniform_grid(1.0, 1025);
        let f = sample_fbm(0.75, &times, 12, FbmMethod::Circulant).unwrap();
        let g = sample_fbm(0.75, &times, 13, FbmMethod::Circulant).unwrap();
        let f = SampledFunction::new(times.clone(), f.values).unwrap();
        let g = SampledFunction::new(times.clone(), g.values).unwrap();
        let sym = young_riemann(&f, &g).unwrap();
        for a in [0.3, 0.4, 0.45] {
            let v = stieltjes_integral(&f, &g, &cfg(a)).unwrap();
            assert!((v - sym).abs() < 1e-6, "α = {a}: {v} vs {sym}");
        }
        let self_integral = young_riemann(&f, &f).unwrap();
        let last = f.values()[1024];
        assert!((self_integral - 0.5 * last * last).abs() < 1e-12);
    }

    #[test]
    fn grid_mismatch_rejected() {
        let f = SampledFunction::from_fn(&uniform_grid(1.0, 9), |t| t).unwrap();
        let g = SampledFunction::from_fn(&uniform_grid(1.0, 17), |t| t).unwrap();
        assert!(stieltjes_integral(&f, &g, &cfg(0.4)).is_err());
        assert!(young_riemann(&f, &g).is_err());
    }
}
