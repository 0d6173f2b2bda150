//! Scalar fractional Brownian motion.
//!
//! Paths are sampled exactly from the Gaussian law with covariance
//! `½(t^{2H} + s^{2H} − |t−s|^{2H})`, either by a dense Cholesky factor of the
//! covariance matrix or, on uniform grids, by circulant embedding of the
//! fractional Gaussian noise (Davies–Harte).

use std::io::Write;
use std::sync::Arc;

use log::warn;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::{Fft, FftPlanner};

use crate::rng;
use crate::stats::log_log_slope;
use crate::{Error, Result};

/// Relative tolerance used to decide whether a grid is uniform.
const UNIFORM_TOL: f64 = 1e-9;

/// Minimum path length accepted by [`estimate_holder`].
pub const MIN_HOLDER_LEN: usize = 1 << 10;

/// One sampled path of a standard fBm.
#[derive(Debug, Clone, PartialEq)]
pub struct FbmPath {
    pub hurst: f64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FbmMethod {
    #[default]
    Cholesky,
    Circulant,
}

pub(crate) fn check_hurst(hurst: f64) -> Result<()> {
    if hurst.is_finite() && hurst > 0.5 && hurst < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("Hurst index must lie in (1/2, 1), got {hurst}")))
    }
}

/// Covariance `E[β_t β_s]` of a standard fBm.
pub fn fbm_covariance(t: f64, s: f64, hurst: f64) -> Result<f64> {
    check_hurst(hurst)?;
    if !(t >= 0.0 && s >= 0.0) || !t.is_finite() || !s.is_finite() {
        return Err(Error::Domain(format!("fBm covariance needs nonnegative finite times, got ({t}, {s})")));
    }
    Ok(covariance_unchecked(t, s, hurst))
}

fn covariance_unchecked(t: f64, s: f64, hurst: f64) -> f64 {
    let e = 2.0 * hurst;
    0.5 * (t.powf(e) + s.powf(e) - (t - s).abs().powf(e))
}

/// Autocovariance of unit-spacing fractional Gaussian noise at lag `k`.
fn fgn_autocovariance(k: usize, hurst: f64) -> f64 {
    let e = 2.0 * hurst;
    let k = k as f64;
    0.5 * ((k + 1.0).powf(e) - 2.0 * k.powf(e) + (k - 1.0).abs().powf(e))
}

pub(crate) fn check_grid(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::Domain("time grid is empty".into()));
    }
    if times[0] != 0.0 {
        return Err(Error::Domain(format!("time grid must start at 0, starts at {}", times[0])));
    }
    for w in times.windows(2) {
        if !(w[1] > w[0]) || !w[1].is_finite() {
            return Err(Error::Domain(format!(
                "time grid must be strictly increasing and finite near t = {}",
                w[0]
            )));
        }
    }
    Ok(())
}

/// Common spacing of `times`, or `None` if the grid is not uniform.
pub fn uniform_spacing(times: &[f64]) -> Option<f64> {
    if times.len() < 2 {
        return None;
    }
    let h = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    let uniform = times
        .iter()
        .enumerate()
        .all(|(k, &t)| (t - (times[0] + k as f64 * h)).abs() <= UNIFORM_TOL * h.max(t.abs()));
    uniform.then_some(h)
}

/// Uniform grid of `len` points on `[0, t_end]`.
pub fn uniform_grid(t_end: f64, len: usize) -> Vec<f64> {
    if len == 1 {
        return vec![0.0];
    }
    let h = t_end / (len - 1) as f64;
    (0..len).map(|k| k as f64 * h).collect()
}

enum Factor {
    /// Grid `{0}`: the path is identically zero.
    Trivial,
    /// Row-major lower-triangular factor of the covariance on `times[1..]`.
    Cholesky {
        lower: Vec<f64>,
        dim: usize,
    },
    Circulant {
        sqrt_eig: Vec<f64>,
        fft: Arc<dyn Fft<f64>>,
        scale: f64,
    },
}

/// Factorized sampler for one `(H, grid, method)` triple.
///
/// The factorization is done once; [`FbmSampler::sample_stream`] is then cheap
/// and may be called concurrently from many threads.
pub struct FbmSampler {
    hurst: f64,
    times: Vec<f64>,
    method: FbmMethod,
    factor: Factor,
    clamped_mass: f64,
}

impl std::fmt::Debug for FbmSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FbmSampler")
            .field("hurst", &self.hurst)
            .field("len", &self.times.len())
            .field("method", &self.method)
            .field("clamped_mass", &self.clamped_mass)
            .finish()
    }
}

impl FbmSampler {
    pub fn new(hurst: f64, times: &[f64], method: FbmMethod) -> Result<Self> {
        check_hurst(hurst)?;
        check_grid(times)?;
        let mut clamped_mass = 0.0;
        let factor = if times.len() == 1 {
            Factor::Trivial
        } else {
            match method {
                FbmMethod::Cholesky => cholesky_factor(hurst, &times[1..])?,
                FbmMethod::Circulant => {
                    let h = uniform_spacing(times).ok_or_else(|| {
                        Error::Domain(
                            "circulant sampling requires a uniform grid; use the Cholesky method".into(),
                        )
                    })?;
                    let (factor, mass) = circulant_factor(hurst, times.len() - 1, h);
                    clamped_mass = mass;
                    factor
                }
            }
        };
        Ok(Self { hurst, times: times.to_vec(), method, factor, clamped_mass })
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn method(&self) -> FbmMethod {
        self.method
    }

    /// Fraction of embedding spectrum mass removed by clamping negative
    /// eigenvalues to zero (always 0 for Cholesky).
    pub fn clamped_mass(&self) -> f64 {
        self.clamped_mass
    }

    pub fn sample(&self, seed: u64) -> FbmPath {
        self.sample_stream(seed, 0)
    }

    /// Path drawn from stream `stream` of `seed`. The recorded seed is `seed`.
    pub fn sample_stream(&self, seed: u64, stream: u64) -> FbmPath {
        let mut rng = rng::stream(seed, stream);
        let m = self.times.len();
        let mut values = vec![0.0; m];
        match &self.factor {
            Factor::Trivial => {}
            Factor::Cholesky { lower, dim } => {
                let z: Vec<f64> = (0..*dim).map(|_| rng.sample(StandardNormal)).collect();
                for i in 0..*dim {
                    let row = &lower[i * dim..i * dim + i + 1];
                    values[i + 1] = row.iter().zip(&z).map(|(a, b)| a * b).sum();
                }
            }
            Factor::Circulant { sqrt_eig, fft, scale } => {
                let mut buf: Vec<Complex64> = sqrt_eig
                    .iter()
                    .map(|&s| {
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = rng.sample(StandardNormal);
                        Complex64::new(s * re, s * im)
                    })
                    .collect();
                fft.process(&mut buf);
                let mut acc = 0.0;
                for k in 1..m {
                    acc += scale * buf[k - 1].re;
                    values[k] = acc;
                }
            }
        }
        FbmPath { hurst: self.hurst, times: self.times.clone(), values, seed }
    }
}

fn cholesky_factor(hurst: f64, times: &[f64]) -> Result<Factor> {
    let dim = times.len();
    let cov = DMatrix::from_fn(dim, dim, |i, j| covariance_unchecked(times[i], times[j], hurst));
    let chol = cov.cholesky().ok_or_else(|| {
        Error::Numerical(format!(
            "fBm covariance matrix on {dim} points is not numerically positive definite \
             (H = {hurst}, min spacing {:.3e}); use a coarser grid or the circulant method",
            times.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
        ))
    })?;
    let l = chol.l();
    let mut lower = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..=i {
            lower[i * dim + j] = l[(i, j)];
        }
    }
    Ok(Factor::Cholesky { lower, dim })
}

fn circulant_factor(hurst: f64, increments: usize, h: f64) -> (Factor, f64) {
    let m = increments.next_power_of_two();
    let size = 2 * m;
    let mut c: Vec<Complex64> = (0..size)
        .map(|k| {
            let lag = if k <= m { k } else { size - k };
            Complex64::new(fgn_autocovariance(lag, hurst), 0.0)
        })
        .collect();
    let fft = FftPlanner::new().plan_fft_forward(size);
    fft.process(&mut c);
    let total: f64 = c.iter().map(|z| z.re.abs()).sum();
    let negative: f64 = c.iter().filter(|z| z.re < 0.0).map(|z| -z.re).sum();
    let clamped = if total > 0.0 { negative / total } else { 0.0 };
    if negative > 0.0 {
        warn!(
            "circulant embedding has negative eigenvalues (H = {hurst}, size {size}); \
             clamped mass fraction {clamped:.3e}"
        );
    }
    let sqrt_eig = c.iter().map(|z| (z.re.max(0.0) / size as f64).sqrt()).collect();
    (Factor::Circulant { sqrt_eig, fft, scale: h.powf(hurst) }, clamped)
}

/// Sample one fBm path on `times`.
pub fn sample_fbm(hurst: f64, times: &[f64], seed: u64, method: FbmMethod) -> Result<FbmPath> {
    Ok(FbmSampler::new(hurst, times, method)?.sample(seed))
}

/// Dyadic lag window `h = T·2^{−j}` for `j_min ≤ j ≤ j_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LagWindow {
    pub j_min: u32,
    pub j_max: u32,
}

impl LagWindow {
    /// The `count` finest dyadic lags representable on a uniform grid of `len`
    /// points, the finest being one grid step (rounded).
    pub fn finest(len: usize, count: u32) -> Self {
        let steps = len.saturating_sub(1).max(1);
        let j_max = (steps as f64).log2().round() as u32;
        Self { j_min: j_max.saturating_sub(count.saturating_sub(1)), j_max }
    }

    /// Distinct lags in grid steps for a grid with `steps` intervals.
    pub fn lag_steps(&self, steps: usize) -> Vec<usize> {
        let mut lags: Vec<usize> = (self.j_min..=self.j_max)
            .map(|j| (steps as f64 / 2f64.powi(j as i32)).round() as usize)
            .filter(|&l| l >= 1 && l < steps)
            .collect();
        lags.sort_unstable();
        lags.dedup();
        lags
    }
}

impl Default for LagWindow {
    /// Seven dyadic lags ending at one grid step on a `2^16`-interval grid.
    fn default() -> Self {
        Self { j_min: 10, j_max: 16 }
    }
}

/// Half the log-log slope of the second-moment structure function
/// `S(ℓ) = mean_k d(k, k+ℓ)²` over the lags (in grid steps), with `dist2`
/// returning the squared increment between two grid indices.
pub fn structure_exponent<F>(len: usize, spacing: f64, lags: &[usize], dist2: F) -> Result<f64>
where
    F: Fn(usize, usize) -> f64,
{
    if lags.len() < 2 {
        return Err(Error::Estimation(format!("need at least two distinct lags, got {}", lags.len())));
    }
    let mut xs = Vec::with_capacity(lags.len());
    let mut ys = Vec::with_capacity(lags.len());
    for &lag in lags {
        if lag == 0 || lag >= len {
            return Err(Error::Estimation(format!("lag of {lag} steps does not fit a path of length {len}")));
        }
        let count = len - lag;
        let s: f64 = (0..count).map(|k| dist2(k, k + lag)).sum::<f64>() / count as f64;
        if !(s > 0.0) {
            return Err(Error::Estimation(format!(
                "degenerate path: zero mean-squared increment at lag {lag}"
            )));
        }
        xs.push(lag as f64 * spacing);
        ys.push(s);
    }
    Ok(0.5 * log_log_slope(&xs, &ys)?)
}

/// Hölder exponent estimate from the second-moment structure function.
///
/// The grid must be uniform and hold at least [`MIN_HOLDER_LEN`] points. The
/// Hurst index stored in the path is not used, so Brownian paths (`H = ½`)
/// and smooth paths are accepted.
pub fn estimate_holder(path: &FbmPath, window: LagWindow) -> Result<f64> {
    estimate_holder_values(&path.times, &path.values, window)
}

/// [`estimate_holder`] on raw `(times, values)` slices.
pub fn estimate_holder_values(times: &[f64], values: &[f64], window: LagWindow) -> Result<f64> {
    if times.len() != values.len() {
        return Err(Error::shape(times.len(), values.len()));
    }
    if times.len() < MIN_HOLDER_LEN {
        return Err(Error::Estimation(format!(
            "path has {} points; at least {MIN_HOLDER_LEN} are needed",
            times.len()
        )));
    }
    let h = uniform_spacing(times)
        .ok_or_else(|| Error::Estimation("Hölder estimation requires a uniform grid".into()))?;
    if values.iter().all(|v| *v == 0.0) {
        return Err(Error::Estimation("degenerate path: all values are zero".into()));
    }
    let lags = window.lag_steps(times.len() - 1);
    structure_exponent(times.len(), h, &lags, |i, j| (values[j] - values[i]).powi(2))
}

impl FbmPath {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Two-column `time,value` CSV with a header line.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "time,value")?;
        for (t, v) in self.times.iter().zip(&self.values) {
            writeln!(out, "{t:.17e},{v:.17e}")?;
        }
        Ok(())
    }
}
