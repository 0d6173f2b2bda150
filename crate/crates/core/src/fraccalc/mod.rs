//! Fractional calculus on sampled paths.
//!
//! Sampled functions are read as their piecewise-linear interpolants. All
//! singular integrals are evaluated by product integration: on each cell the
//! interpolant is linear, so integrals against `(t−s)^{−α−1}` and similar
//! kernels are done in closed form.
//!
//! Sign convention: the formal prefactors `(−1)^α` and `(−1)^{1−α}` of the
//! generalized Stieltjes integral multiply to `−1`. The right derivatives here
//! are the real brackets without `(−1)^α`, and [`stieltjes_integral`] carries
//! the overall minus sign, so smooth pairs reproduce `∫ f g′ ds`.

pub mod oracles;
mod stieltjes;
mod stochastic;
mod weyl;

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Mul, Sub};

use num_complex::Complex64;

use crate::{Error, Result};

pub use stieltjes::{stieltjes_integral, young_riemann, StieltjesIntegrator};
pub use stochastic::{
    chain_rule_residual, fubini_residual, stochastic_integral, FieldFunctional, StochasticIntegral,
    PARTIAL_SUM_THRESHOLD,
};
pub use weyl::{lambda_alpha, w_alpha1_norm, weyl_left, weyl_right};

/// Scalar values a sampled function may take.
pub trait Sample:
    Copy
    + Debug
    + Default
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<f64, Output = Self>
    + AddAssign
{
    fn magnitude(self) -> f64;
    fn to_complex(self) -> Complex64;
    fn from_complex(z: Complex64) -> Self;
    fn is_finite_value(self) -> bool;
}

impl Sample for f64 {
    fn magnitude(self) -> f64 {
        self.abs()
    }
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
    fn from_complex(z: Complex64) -> Self {
        z.re
    }
    fn is_finite_value(self) -> bool {
        self.is_finite()
    }
}

impl Sample for Complex64 {
    fn magnitude(self) -> f64 {
        self.norm()
    }
    fn to_complex(self) -> Complex64 {
        self
    }
    fn from_complex(z: Complex64) -> Self {
        z
    }
    fn is_finite_value(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Values of a function on a strictly increasing time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction<T> {
    times: Vec<f64>,
    values: Vec<T>,
}

impl<T: Sample> SampledFunction<T> {
    pub fn new(times: Vec<f64>, values: Vec<T>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::shape(times.len(), values.len()));
        }
        if times.len() < 2 {
            return Err(Error::Domain("a sampled function needs at least two points".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) || times.iter().any(|t| !t.is_finite()) {
            return Err(Error::Domain("sample times must be finite and strictly increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite_value()) {
            return Err(Error::Domain("sampled values must be finite".into()));
        }
        Ok(Self { times, values })
    }

    /// Samples of `f` on `times`.
    pub fn from_fn(times: &[f64], f: impl Fn(f64) -> T) -> Result<Self> {
        Self::new(times.to_vec(), times.iter().map(|&t| f(t)).collect())
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Index `k` of the cell `[t_k, t_{k+1}]` containing `t` (the last cell
    /// for `t = end`).
    fn cell_of(&self, t: f64) -> usize {
        let k = self.times.partition_point(|&s| s <= t);
        k.saturating_sub(1).min(self.times.len() - 2)
    }

    fn slope(&self, k: usize) -> T {
        (self.values[k + 1] - self.values[k]) * (1.0 / (self.times[k + 1] - self.times[k]))
    }

    /// Value of the piecewise-linear interpolant at `t ∈ [start, end]`.
    pub fn eval(&self, t: f64) -> T {
        let k = self.cell_of(t);
        self.values[k] + self.slope(k) * (t - self.times[k])
    }

    /// Restriction of the interpolant to `[lo, hi]`, with nodes at `lo`, `hi`
    /// and every grid time strictly between them.
    pub fn restrict(&self, lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || lo < self.start() || hi > self.end() {
            return Err(Error::Domain(format!(
                "cannot restrict a function on [{}, {}] to [{lo}, {hi}]",
                self.start(),
                self.end()
            )));
        }
        let tol = 1e-12 * (self.end() - self.start());
        let mut times = vec![lo];
        let mut values = vec![self.eval(lo)];
        for (t, v) in self.times.iter().zip(&self.values) {
            if *t > lo + tol && *t < hi - tol {
                times.push(*t);
                values.push(*v);
            }
        }
        times.push(hi);
        values.push(self.eval(hi));
        Self::new(times, values)
    }

    /// `s ↦ f(a + b − s)` on the mirrored grid.
    pub fn reflect(&self) -> Self {
        let (a, b) = (self.start(), self.end());
        Self {
            times: self.times.iter().rev().map(|t| a + b - t).collect(),
            values: self.values.iter().rev().copied().collect(),
        }
    }

    /// Same grid, values mapped through `f`.
    pub fn map<U: Sample>(&self, f: impl Fn(T) -> U) -> SampledFunction<U> {
        SampledFunction { times: self.times.clone(), values: self.values.iter().map(|v| f(*v)).collect() }
    }
}

/// Treatment of the singular point of each fractional integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CutoffPolicy {
    /// Closed-form integration of the kernel against the local interpolant,
    /// including the cell that touches the singularity.
    #[default]
    ProductIntegration,
    /// Drop the `cells` grid cells nearest to each singular point.
    Excise { cells: usize },
}

/// Parameters shared by the fractional operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracConfig {
    pub alpha: f64,
    /// Outer-quadrature sub-cells per grid cell in the Stieltjes integral.
    pub refinement: usize,
    pub cutoff: CutoffPolicy,
}

/// Default sub-cell count of the outer Stieltjes quadrature.
pub const DEFAULT_REFINEMENT: usize = 4;

/// Default order, inside `(1−H, ½)` for `H = 0.75`.
pub const DEFAULT_ALPHA: f64 = 0.4;

impl Default for FracConfig {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            refinement: DEFAULT_REFINEMENT,
            cutoff: CutoffPolicy::ProductIntegration,
        }
    }
}

impl FracConfig {
    pub fn new(alpha: f64) -> Result<Self> {
        let cfg = Self { alpha, ..Self::default() };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Configuration for integrals against an fBm of index `hurst`, which
    /// requires `α ∈ (1−H, ½)`.
    pub fn stochastic(alpha: f64, hurst: f64) -> Result<Self> {
        let cfg = Self::new(alpha)?;
        cfg.check_stochastic(hurst)?;
        Ok(cfg)
    }

    pub fn with_refinement(mut self, refinement: usize) -> Self {
        self.refinement = refinement;
        self
    }

    pub fn with_cutoff(mut self, cutoff: CutoffPolicy) -> Self {
        self.cutoff = cutoff;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Domain(format!("fractional order α must lie in (0, 1), got {}", self.alpha)));
        }
        if self.refinement == 0 {
            return Err(Error::Config("quadrature refinement must be at least 1".into()));
        }
        Ok(())
    }

    pub fn check_stochastic(&self, hurst: f64) -> Result<()> {
        if self.alpha > 1.0 - hurst && self.alpha < 0.5 {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "α = {} must lie in (1−H, 1/2) = ({:.4}, 0.5) for H = {hurst}",
                self.alpha,
                1.0 - hurst
            )))
        }
    }

    /// Number of excised cells (0 for product integration).
    fn excised(&self) -> usize {
        match self.cutoff {
            CutoffPolicy::ProductIntegration => 0,
            CutoffPolicy::Excise { cells } => cells,
        }
    }
}

/// `Γ(x)`.
pub(crate) fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stochastic_window() {
        assert!(FracConfig::stochastic(0.4, 0.75).is_ok());
        assert!(FracConfig::stochastic(0.2, 0.75).is_err());
        assert!(FracConfig::stochastic(0.5, 0.75).is_err());
        assert!(FracConfig::new(1.0).is_err());
    }

    #[test]
    fn restrict_and_reflect() {
        let f = SampledFunction::from_fn(&[0.0, 1.0, 2.0, 3.0], |t| t * t).unwrap();
        let r = f.restrict(0.5, 2.0).unwrap();
        assert_eq!(r.times(), &[0.5, 1.0, 2.0]);
        assert_eq!(r.values(), &[0.5, 1.0, 4.0]);
        let m = f.reflect();
        assert_eq!(m.times(), &[0.0, 1.0, 2.0, 3.0]);
        assert_eq!(m.values(), &[9.0, 4.0, 1.0, 0.0]);
        assert!((f.eval(2.5) - 6.5).abs() < 1e-15);
        assert_eq!(f.eval(3.0), 9.0);
    }

    #[test]
    fn rejects_bad_samples() {
        assert!(SampledFunction::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(SampledFunction::new(vec![0.0, 1.0], vec![1.0, f64::NAN]).is_err());
        assert!(SampledFunction::new(vec![0.0], vec![1.0]).is_err());
    }
}
