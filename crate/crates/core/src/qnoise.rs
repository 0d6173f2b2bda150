//! Q-fractional noise `B(t,x) = Σ_p λ_p e_p(x) β_p(t)` on a periodic box.
//!
//! The eigenfunctions are the real orthonormal Fourier modes of the torus:
//! the constant `1/√|𝕋|`, then `√(2/|𝕋|)·cos(k·x)` and `√(2/|𝕋|)·sin(k·x)` for
//! lattice vectors `m` in a half space, ordered by `|m|²`. Amplitudes follow
//! `λ_p = (1+|k_p|²)^{−s/2}`.

use std::io::Write;

use log::warn;
use rayon::prelude::*;

use crate::fbm::{check_grid, check_hurst, uniform_spacing, FbmMethod, FbmSampler};
use crate::spectral::{Spectral, Torus};
use crate::stats::holder_norm;
use crate::wave::write_f64_le;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeKind {
    Constant,
    Cos,
    Sin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseMode {
    /// Integer lattice vector; unused axes are 0.
    pub lattice: [i64; 3],
    pub kind: ModeKind,
    /// Physical wavevector `2π m / L`.
    pub wavevector: [f64; 3],
    pub lambda: f64,
}

impl NoiseMode {
    pub fn k2(&self) -> f64 {
        self.wavevector.iter().map(|k| k * k).sum()
    }

    /// `‖e_p‖_{H^m}` of the normalized eigenfunction.
    pub fn sobolev_norm(&self, m: f64) -> f64 {
        (1.0 + self.k2()).powf(0.5 * m)
    }

    /// `(e_p(x), ∇e_p(x))` for a box of volume `volume`.
    pub fn eval(&self, x: &[f64], volume: f64) -> (f64, [f64; 3]) {
        let phase: f64 = x.iter().zip(&self.wavevector).map(|(a, b)| a * b).sum();
        let amp = (2.0 / volume).sqrt();
        let k = self.wavevector;
        match self.kind {
            ModeKind::Constant => (1.0 / volume.sqrt(), [0.0; 3]),
            ModeKind::Cos => {
                let s = -amp * phase.sin();
                (amp * phase.cos(), [s * k[0], s * k[1], s * k[2]])
            }
            ModeKind::Sin => {
                let c = amp * phase.cos();
                (amp * phase.sin(), [c * k[0], c * k[1], c * k[2]])
            }
        }
    }
}

/// Truncated spectral decomposition of the noise covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpectrum {
    pub dim: usize,
    pub length: f64,
    pub decay: f64,
    pub sobolev_order: i32,
    pub modes: Vec<NoiseMode>,
    /// Partial sums of `λ_p ‖e_p‖_{H^{q+4}}`; the last entry is the full sum.
    pub partial_sums: Vec<f64>,
}

/// Smallest decay rate accepted by [`NoiseSpectrum::build`] (exclusive).
pub fn decay_bound(dim: usize, q: i32) -> f64 {
    q as f64 + 4.0 + dim as f64 / 2.0 + 1.0
}

/// Default decay rate `q + 7`.
pub fn default_decay(q: i32) -> f64 {
    q as f64 + 7.0
}

/// Half-space lattice vectors in `dim` dimensions ordered by `|m|²`, then
/// lexicographically; enough of them to supply `count` real modes.
fn half_space_lattice(dim: usize, count: usize) -> Vec<[i64; 3]> {
    let needed = count.div_ceil(2);
    let mut radius = 1i64;
    loop {
        let mut out = Vec::new();
        let r = radius;
        let range = |d: usize| if d < dim { -r..=r } else { 0..=0 };
        for a in range(0) {
            for b in range(1) {
                for c in range(2) {
                    let m = [a, b, c];
                    let first = m.iter().copied().find(|&v| v != 0);
                    if matches!(first, Some(v) if v > 0) {
                        out.push(m);
                    }
                }
            }
        }
        out.sort_by_key(|m| (m.iter().map(|v| v * v).sum::<i64>(), *m));
        // All vectors with |m|² ≤ r² are present once the box has radius r.
        let complete = out.iter().filter(|m| m.iter().map(|v| v * v).sum::<i64>() <= r * r).count();
        if complete >= needed {
            out.truncate(needed);
            return out;
        }
        radius *= 2;
    }
}

impl NoiseSpectrum {
    /// `count` modes on `[0, length)^dim` with decay rate `decay` and `V = H^{q+4}`.
    pub fn build(dim: usize, length: f64, count: usize, decay: f64, q: i32) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::Config(format!("dimension must be 1, 2 or 3, got {dim}")));
        }
        if count == 0 {
            return Err(Error::Config("noise needs at least one mode".into()));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::Config(format!("box length must be positive, got {length}")));
        }
        let bound = decay_bound(dim, q);
        if count > 1 && !(decay > bound) {
            return Err(Error::Config(format!(
                "noise decay rate s = {decay} is too small: summability of \
                 Σ λ_p ‖e_p‖_(H^{}) needs s > q + 4 + n/2 + 1 = {bound}",
                q + 4
            )));
        }
        let mut modes = Vec::with_capacity(count);
        let constant =
            NoiseMode { lattice: [0; 3], kind: ModeKind::Constant, wavevector: [0.0; 3], lambda: 1.0 };
        modes.push(constant);
        for m in half_space_lattice(dim, count - 1) {
            let k = m.map(|v| 2.0 * std::f64::consts::PI * v as f64 / length);
            let lambda = (1.0 + k.iter().map(|v| v * v).sum::<f64>()).powf(-0.5 * decay);
            for kind in [ModeKind::Cos, ModeKind::Sin] {
                if modes.len() < count {
                    modes.push(NoiseMode { lattice: m, kind, wavevector: k, lambda });
                }
            }
        }
        let mut acc = 0.0;
        let partial_sums = modes
            .iter()
            .map(|md| {
                acc += md.lambda * md.sobolev_norm((q + 4) as f64);
                acc
            })
            .collect();
        Ok(Self { dim, length, decay, sobolev_order: q, modes, partial_sums })
    }

    /// Spectrum without modes; the resulting field is identically zero.
    pub fn empty(dim: usize, length: f64, q: i32) -> Self {
        Self {
            dim,
            length,
            decay: default_decay(q),
            sobolev_order: q,
            modes: Vec::new(),
            partial_sums: Vec::new(),
        }
    }

    /// Only the constant mode, with amplitude `lambda`.
    pub fn constant(dim: usize, length: f64, lambda: f64, q: i32) -> Self {
        let mut s = Self::empty(dim, length, q);
        s.modes.push(NoiseMode { lattice: [0; 3], kind: ModeKind::Constant, wavevector: [0.0; 3], lambda });
        s.partial_sums.push(lambda);
        s
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// `Σ_p λ_p ‖e_p‖_{H^{q+4}}`.
    pub fn summability(&self) -> f64 {
        self.partial_sums.last().copied().unwrap_or(0.0)
    }

    pub fn volume(&self) -> f64 {
        self.length.powi(self.dim as i32)
    }

    /// `Var B(t,x) = t^{2H} Σ_p λ_p² e_p(x)²`.
    pub fn pointwise_variance(&self, x: &[f64], t: f64, hurst: f64) -> f64 {
        let v = self.volume();
        let s: f64 = self.modes.iter().map(|m| (m.lambda * m.eval(x, v).0).powi(2)).sum();
        t.powf(2.0 * hurst) * s
    }

    fn check_torus(&self, torus: &Torus) -> Result<()> {
        if torus.dim != self.dim || (torus.length - self.length).abs() > 1e-12 * self.length {
            return Err(Error::Config(format!(
                "noise spectrum on a {}-d box of length {} does not match grid {:?}",
                self.dim, self.length, torus
            )));
        }
        let limit = (torus.n / 2) as i64;
        if let Some(m) = self.modes.iter().find(|m| m.lattice.iter().any(|v| v.abs() >= limit)) {
            return Err(Error::Config(format!(
                "noise mode {:?} is not resolved by {} points per axis",
                &m.lattice[..self.dim],
                torus.n
            )));
        }
        Ok(())
    }
}

/// `B`, `∇B` and `ΔB` on the grid at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSnapshot {
    pub b: Vec<f64>,
    pub grad: Vec<Vec<f64>>,
    pub lap: Vec<f64>,
}

impl NoiseSnapshot {
    pub fn zeros(torus: &Torus) -> Self {
        let size = torus.size();
        Self { b: vec![0.0; size], grad: vec![vec![0.0; size]; torus.dim], lap: vec![0.0; size] }
    }

    /// `true` if every entry of `∇B` vanishes.
    pub fn is_spatially_constant(&self) -> bool {
        self.grad.iter().all(|g| g.iter().all(|v| *v == 0.0))
    }
}

/// A sampled noise realization together with grid profiles of every mode.
#[derive(Debug, Clone)]
pub struct NoiseField {
    spectrum: NoiseSpectrum,
    torus: Torus,
    times: Vec<f64>,
    hurst: f64,
    seed: u64,
    /// `β_p(t_k)`, one vector per mode.
    paths: Vec<Vec<f64>>,
    /// `λ_p e_p`, `λ_p ∇e_p` and `λ_p Δe_p` on the grid, one entry per mode.
    profiles: Vec<NoiseSnapshot>,
}

impl NoiseField {
    /// Independent fBm per mode, stream `p` of `seed` for mode `p`.
    ///
    /// Uniform time grids use circulant embedding, other grids the dense
    /// Cholesky factor; both sample the exact law.
    pub fn sample(
        spectrum: &NoiseSpectrum,
        torus: Torus,
        times: &[f64],
        hurst: f64,
        seed: u64,
    ) -> Result<Self> {
        let method = if times.len() > 2 && uniform_spacing(times).is_some() {
            FbmMethod::Circulant
        } else {
            FbmMethod::Cholesky
        };
        Self::sample_with(spectrum, torus, times, hurst, seed, method)
    }

    pub fn sample_with(
        spectrum: &NoiseSpectrum,
        torus: Torus,
        times: &[f64],
        hurst: f64,
        seed: u64,
        method: FbmMethod,
    ) -> Result<Self> {
        let sampler = FbmSampler::new(hurst, times, method)?;
        let paths = (0..spectrum.len())
            .into_par_iter()
            .map(|p| sampler.sample_stream(seed, p as u64).values)
            .collect();
        Self::from_paths(spectrum, torus, times, hurst, seed, paths)
    }

    /// Assemble a field from given mode paths (one per spectrum mode).
    pub fn from_paths(
        spectrum: &NoiseSpectrum,
        torus: Torus,
        times: &[f64],
        hurst: f64,
        seed: u64,
        paths: Vec<Vec<f64>>,
    ) -> Result<Self> {
        check_hurst(hurst)?;
        check_grid(times)?;
        spectrum.check_torus(&torus)?;
        if paths.len() != spectrum.len() {
            return Err(Error::shape(format!("{} mode paths", spectrum.len()), paths.len()));
        }
        for p in &paths {
            if p.len() != times.len() {
                return Err(Error::shape(times.len(), p.len()));
            }
            if p[0] != 0.0 || p.iter().any(|v| !v.is_finite()) {
                return Err(Error::Domain("mode paths must start at 0 and be finite".into()));
            }
        }
        let profiles = build_profiles(spectrum, &torus);
        Ok(Self { spectrum: spectrum.clone(), torus, times: times.to_vec(), hurst, seed, paths, profiles })
    }

    /// The zero field on `times`.
    pub fn quiet(torus: Torus, times: &[f64], hurst: f64) -> Result<Self> {
        let spectrum = NoiseSpectrum::empty(torus.dim, torus.length, 0);
        Self::from_paths(&spectrum, torus, times, hurst, 0, Vec::new())
    }

    pub fn spectrum(&self) -> &NoiseSpectrum {
        &self.spectrum
    }

    pub fn torus(&self) -> &Torus {
        &self.torus
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn mode_count(&self) -> usize {
        self.paths.len()
    }

    /// `β_p` on the time grid.
    pub fn mode_path(&self, p: usize) -> &[f64] {
        &self.paths[p]
    }

    /// `λ_p e_p` on the spatial grid.
    pub fn mode_profile(&self, p: usize) -> &[f64] {
        &self.profiles[p].b
    }

    /// The unit-normalized eigenfunction `e_p` on the spatial grid.
    pub fn eigenfunction(&self, p: usize) -> Vec<f64> {
        let md = &self.spectrum.modes[p];
        let v = self.torus.volume();
        (0..self.torus.size()).map(|i| md.eval(&self.torus.point(i)[..self.torus.dim], v).0).collect()
    }

    /// `λ_p ∇e_p` on the spatial grid.
    pub fn mode_gradient(&self, p: usize) -> &[Vec<f64>] {
        &self.profiles[p].grad
    }

    /// Index of the grid time equal to `t` (relative tolerance `1e−9`).
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let tol = 1e-9 * self.times.last().copied().unwrap_or(1.0).max(1.0);
        let k = self.times.partition_point(|&s| s < t - tol);
        (k < self.times.len() && (self.times[k] - t).abs() <= tol).then_some(k)
    }

    /// `B(t_k, ·)` on the grid.
    pub fn values(&self, k: usize) -> Vec<f64> {
        let mut b = vec![0.0; self.torus.size()];
        for (path, prof) in self.paths.iter().zip(&self.profiles) {
            let beta = path[k];
            if beta != 0.0 {
                b.iter_mut().zip(&prof.b).for_each(|(o, e)| *o += beta * e);
            }
        }
        b
    }

    /// `B(t_j, ·) − B(t_i, ·)`.
    pub fn increment(&self, i: usize, j: usize) -> Vec<f64> {
        let mut b = vec![0.0; self.torus.size()];
        for (path, prof) in self.paths.iter().zip(&self.profiles) {
            let d = path[j] - path[i];
            if d != 0.0 {
                b.iter_mut().zip(&prof.b).for_each(|(o, e)| *o += d * e);
            }
        }
        b
    }

    /// `B`, `∇B`, `ΔB` at time index `k`.
    pub fn snapshot(&self, k: usize) -> NoiseSnapshot {
        let mut out = NoiseSnapshot::zeros(&self.torus);
        for (path, prof) in self.paths.iter().zip(&self.profiles) {
            let beta = path[k];
            if beta == 0.0 {
                continue;
            }
            out.b.iter_mut().zip(&prof.b).for_each(|(o, e)| *o += beta * e);
            out.lap.iter_mut().zip(&prof.lap).for_each(|(o, e)| *o += beta * e);
            for (g, pg) in out.grad.iter_mut().zip(&prof.grad) {
                g.iter_mut().zip(pg).for_each(|(o, e)| *o += beta * e);
            }
        }
        out
    }

    /// `‖B(t_k)‖_{H^m}`, exact from the mode expansion.
    pub fn sobolev_norm_at(&self, k: usize, m: f64) -> f64 {
        self.spectrum
            .modes
            .iter()
            .zip(&self.paths)
            .map(|(md, path)| (md.lambda * path[k]).powi(2) * (1.0 + md.k2()).powf(m))
            .sum::<f64>()
            .sqrt()
    }

    fn check_compatible(&self, other: &NoiseField) -> Result<()> {
        if self.spectrum != other.spectrum || self.torus != other.torus || self.times != other.times {
            return Err(Error::Domain("noise fields differ in spectrum, grid or time grid".into()));
        }
        Ok(())
    }

    /// `max_k ‖B(t_k) − B'(t_k)‖_{H^m}` for two fields on the same grids.
    pub fn sup_gap(&self, other: &NoiseField, m: f64) -> Result<f64> {
        self.check_compatible(other)?;
        let mut best: f64 = 0.0;
        for k in 0..self.times.len() {
            let s: f64 = self
                .spectrum
                .modes
                .iter()
                .zip(self.paths.iter().zip(&other.paths))
                .map(|(md, (a, b))| (md.lambda * (a[k] - b[k])).powi(2) * (1.0 + md.k2()).powf(m))
                .sum();
            best = best.max(s.sqrt());
        }
        Ok(best)
    }

    /// Keep every `stride`-th time.
    pub fn subsample(&self, stride: usize) -> Result<Self> {
        if stride == 0 || !(self.times.len() - 1).is_multiple_of(stride) {
            return Err(Error::Domain(format!(
                "stride {stride} does not divide the {} time steps",
                self.times.len() - 1
            )));
        }
        let pick = |v: &Vec<f64>| v.iter().step_by(stride).copied().collect::<Vec<f64>>();
        Ok(Self {
            spectrum: self.spectrum.clone(),
            torus: self.torus,
            times: pick(&self.times),
            hurst: self.hurst,
            seed: self.seed,
            paths: self.paths.iter().map(pick).collect(),
            profiles: self.profiles.clone(),
        })
    }

    /// Replace every mode path by a function of its values.
    pub fn map_paths(&self, f: impl Fn(&[f64], &[f64]) -> Vec<f64>) -> Result<Self> {
        let paths = self.paths.iter().map(|p| f(&self.times, p)).collect();
        Self::from_paths(&self.spectrum, self.torus, &self.times, self.hurst, self.seed, paths)
    }

    /// Time-mollified field; see [`mollify_path`]. Windows narrower than the
    /// grid spacing leave the field unchanged (with a logged warning).
    pub fn mollify(&self, eps: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::Domain(format!("mollification width must be positive, got {eps}")));
        }
        let h = uniform_spacing(&self.times)
            .ok_or_else(|| Error::Domain("mollification requires a uniform time grid".into()))?;
        if eps < h {
            warn!("mollification width {eps:.3e} is below the grid spacing {h:.3e}; field unchanged");
            return Ok(self.clone());
        }
        self.map_paths(|_, p| mollify_path(p, window_steps(eps, h)))
    }

    /// Discrete analog of the pathwise constant: `Σ_p λ_p ‖e_p‖_{H^{q+4}} ‖β_p‖_{C^{0,γ}}`.
    pub fn k_analog(&self, gamma: f64) -> f64 {
        let m = (self.spectrum.sobolev_order + 4) as f64;
        self.spectrum
            .modes
            .iter()
            .zip(&self.paths)
            .map(|(md, p)| md.lambda * md.sobolev_norm(m) * holder_norm(&self.times, p, gamma))
            .sum()
    }

    /// Snapshot `k` as flat little-endian binary: `B`, then each `∂_i B`, then
    /// `ΔB`, each a row-major block of the grid size.
    pub fn write_snapshot_binary<W: Write>(&self, k: usize, out: W) -> std::io::Result<()> {
        let s = self.snapshot(k);
        let mut flat = s.b.clone();
        for g in &s.grad {
            flat.extend_from_slice(g);
        }
        flat.extend_from_slice(&s.lap);
        write_f64_le(out, &flat)
    }

    /// Snapshot `k` as CSV with columns `x0[,x1[,x2]],B,dB_0..,lapB`.
    pub fn write_snapshot_csv<W: Write>(&self, k: usize, mut out: W) -> std::io::Result<()> {
        let s = self.snapshot(k);
        let dim = self.torus.dim;
        let mut header: Vec<String> = (0..dim).map(|d| format!("x{d}")).collect();
        header.push("B".into());
        header.extend((0..dim).map(|d| format!("dB_{d}")));
        header.push("lapB".into());
        writeln!(out, "{}", header.join(","))?;
        for i in 0..self.torus.size() {
            let x = self.torus.point(i);
            let mut row: Vec<String> = x[..dim].iter().map(|v| format!("{v:.17e}")).collect();
            row.push(format!("{:.17e}", s.b[i]));
            row.extend(s.grad.iter().map(|g| format!("{:.17e}", g[i])));
            row.push(format!("{:.17e}", s.lap[i]));
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

fn build_profiles(spectrum: &NoiseSpectrum, torus: &Torus) -> Vec<NoiseSnapshot> {
    let v = torus.volume();
    spectrum
        .modes
        .par_iter()
        .map(|md| {
            let mut s = NoiseSnapshot::zeros(torus);
            let k2 = md.k2();
            for i in 0..torus.size() {
                let x = torus.point(i);
                let (e, g) = md.eval(&x[..torus.dim], v);
                s.b[i] = md.lambda * e;
                s.lap[i] = -k2 * md.lambda * e;
                for (d, gd) in s.grad.iter_mut().enumerate() {
                    gd[i] = md.lambda * g[d];
                }
            }
            s
        })
        .collect()
}

/// Window width in grid steps for mollification width `eps` at spacing `h`.
pub fn window_steps(eps: f64, h: f64) -> usize {
    // Guard against ε/h landing a hair below an integer.
    ((eps / h) * (1.0 + 1e-12)).floor().max(1.0) as usize
}

/// Piecewise-linear interpolation through the knots `0, w, 2w, …` and the
/// final index, followed (for `w ≥ 2`) by one `¼,½,¼` averaging pass on
/// interior points. Neither step increases the discrete Hölder seminorm of
/// any order, and the endpoints are preserved.
pub fn mollify_path(values: &[f64], w: usize) -> Vec<f64> {
    let m = values.len();
    if w <= 1 || m < 3 {
        return values.to_vec();
    }
    let last = m - 1;
    let mut out = vec![0.0; m];
    let mut a = 0;
    while a < last {
        let b = (a + w).min(last);
        let (va, vb) = (values[a], values[b]);
        for (j, o) in out[a..=b].iter_mut().enumerate() {
            *o = va + (vb - va) * j as f64 / (b - a) as f64;
        }
        out[b] = vb;
        a = b;
    }
    let mut smooth = out.clone();
    for j in 1..last {
        smooth[j] = 0.25 * out[j - 1] + 0.5 * out[j] + 0.25 * out[j + 1];
    }
    smooth
}

/// Spectral consistency check: largest deviation between the cached mode
/// derivatives of snapshot `k` and FFT derivatives of its `B`.
pub fn spectral_derivative_defect(field: &NoiseField, k: usize) -> f64 {
    let sp = Spectral::new(*field.torus());
    let s = field.snapshot(k);
    let grad = sp.gradient_real(&s.b);
    let lap = sp.laplacian_real(&s.b);
    let mut worst: f64 = 0.0;
    for (a, b) in grad.iter().zip(&s.grad) {
        for (x, y) in a.iter().zip(b) {
            worst = worst.max((x - y).abs());
        }
    }
    for (x, y) in lap.iter().zip(&s.lap) {
        worst = worst.max((x - y).abs());
    }
    worst
}
