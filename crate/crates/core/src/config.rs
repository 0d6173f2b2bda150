//! Run configuration, read from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::fbm::{check_hurst, uniform_grid};
use crate::magschrod::Scheme;
use crate::nonlinear::Nonlinearity;
use crate::qnoise::{default_decay, NoiseSpectrum};
use crate::spectral::Torus;
use crate::wave::WaveField;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    /// One trajectory per step size, with charge, energy and residual series.
    Solve,
    /// Direct against gauge route over the step sweep.
    GaugeEquivalence,
    /// Stieltjes and Weyl oracle suite.
    Fraccalc,
    /// Solution and noise gaps over a mollification sweep.
    Mollification,
}

impl Experiment {
    pub const ALL: [Experiment; 4] =
        [Experiment::Solve, Experiment::GaugeEquivalence, Experiment::Fraccalc, Experiment::Mollification];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Solve => "solve",
            Experiment::GaugeEquivalence => "gauge-equivalence",
            Experiment::Fraccalc => "fraccalc",
            Experiment::Mollification => "mollification",
        }
    }
}

impl std::str::FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL.into_iter().find(|e| e.name() == s).ok_or_else(|| {
            let names: Vec<_> = Experiment::ALL.iter().map(|e| e.name()).collect();
            Error::Config(format!("unknown experiment {s:?}; expected one of {}", names.join(", ")))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub dim: usize,
    pub n: usize,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    pub hurst: f64,
    pub modes: usize,
    /// Spectral decay `s` in `λ_p = (1 + |k_p|²)^{−s/2}`; defaults to `q + 7`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay: Option<f64>,
    /// Sobolev order of the data.
    pub q: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub scheme: Scheme,
    pub dt: Vec<f64>,
    pub t_end: f64,
    pub alpha: f64,
}

/// Gaussian packet `exp(−|x − L/2|²/(2w²) + i k₀ x₁)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialConfig {
    pub width: f64,
    pub k0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MollificationConfig {
    pub eps: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub experiment: Experiment,
    pub seed: u64,
    /// Worker threads; 0 uses all cores.
    #[serde(default)]
    pub workers: usize,
    pub out: PathBuf,
    pub grid: GridConfig,
    pub noise: NoiseConfig,
    pub solver: SolverSection,
    pub nonlinearity: Nonlinearity,
    pub initial: InitialConfig,
    pub mollification: MollificationConfig,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { dim: 1, n: 256, length: 8.0 * std::f64::consts::PI }
    }
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self { hurst: 0.75, modes: 32, decay: None, q: 0 }
    }
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            scheme: Scheme::CrankNicolsonMag,
            dt: (8..=12).map(|j| 0.5f64.powi(j)).collect(),
            t_end: 1.0,
            alpha: 0.4,
        }
    }
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self { width: 1.0, k0: 2.0 }
    }
}

impl Default for MollificationConfig {
    fn default() -> Self {
        Self { eps: (2..=7).map(|j| 0.5f64.powi(j)).collect() }
    }
}

/// Missing keys and tables take these values.
impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            experiment: Experiment::GaugeEquivalence,
            seed: 42,
            workers: 0,
            out: PathBuf::from("out"),
            grid: GridConfig::default(),
            noise: NoiseConfig::default(),
            solver: SolverSection::default(),
            nonlinearity: Nonlinearity::Power { sigma: 1.0, mu: 1.0 },
            initial: InitialConfig::default(),
            mollification: MollificationConfig::default(),
        }
    }
}

fn cfg_err(e: Error) -> Error {
    match e {
        Error::Config(m) => Error::Config(m),
        other => Error::Config(other.to_string()),
    }
}

impl SolverConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SolverConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// SHA-256 of the canonical TOML form without the output directory and
    /// worker count, which do not affect results.
    pub fn hash(&self) -> String {
        let mut physics = self.clone();
        physics.out = PathBuf::new();
        physics.workers = 0;
        hex::encode(Sha256::digest(physics.to_toml().as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        check_hurst(self.noise.hurst)
            .map_err(|_| Error::Config(format!("hurst = {} must lie in (1/2, 1)", self.noise.hurst)))?;
        let h = self.noise.hurst;
        let a = self.solver.alpha;
        if !(a > 1.0 - h && a < 0.5) {
            return Err(Error::Config(format!("alpha = {a} must lie in (1 − H, 1/2) = ({}, 1/2)", 1.0 - h)));
        }
        if !(1..=3).contains(&self.grid.dim) {
            return Err(Error::Config(format!("dim = {} must be 1, 2 or 3", self.grid.dim)));
        }
        if !self.grid.n.is_power_of_two() || self.grid.n < 2 {
            return Err(Error::Config(format!("n = {} must be a power of two ≥ 2", self.grid.n)));
        }
        self.torus()?;
        if !(self.solver.t_end > 0.0 && self.solver.t_end.is_finite()) {
            return Err(Error::Config(format!("t_end = {} must be positive", self.solver.t_end)));
        }
        if self.solver.dt.is_empty() {
            return Err(Error::Config("dt list is empty".into()));
        }
        self.noise_times()?;
        self.spectrum()?;
        self.nonlinearity.validate(self.grid.dim, self.noise.q).map_err(cfg_err)?;
        if !(self.initial.width > 0.0 && self.initial.k0.is_finite()) {
            return Err(Error::Config("initial width must be positive and k0 finite".into()));
        }
        if let Some(e) = self.mollification.eps.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return Err(Error::Config(format!("mollification width {e} must be positive")));
        }
        if self.experiment == Experiment::Mollification && self.mollification.eps.is_empty() {
            return Err(Error::Config("the mollification experiment needs at least one width".into()));
        }
        Ok(())
    }

    pub fn torus(&self) -> Result<Torus> {
        Torus::new(self.grid.dim, self.grid.n, self.grid.length).map_err(cfg_err)
    }

    pub fn decay(&self) -> f64 {
        self.noise.decay.unwrap_or_else(|| default_decay(self.noise.q))
    }

    pub fn spectrum(&self) -> Result<NoiseSpectrum> {
        NoiseSpectrum::build(self.grid.dim, self.grid.length, self.noise.modes, self.decay(), self.noise.q)
            .map_err(cfg_err)
    }

    /// The shared noise grid: spacing is the finest step divided by the
    /// scheme's stride multiple, so every step in the sweep (and every
    /// Crank–Nicolson midpoint) lands on it.
    pub fn noise_times(&self) -> Result<Vec<f64>> {
        let dts = &self.solver.dt;
        if let Some(d) = dts.iter().find(|d| !(**d > 0.0 && d.is_finite())) {
            return Err(Error::Config(format!("time step {d} must be positive")));
        }
        let finest = dts.iter().copied().fold(f64::INFINITY, f64::min);
        let h = finest / self.solver.scheme.stride_multiple() as f64;
        let on_grid = |x: f64| (x / h - (x / h).round()).abs() < 1e-9 * (x / h).max(1.0);
        for &d in dts {
            if !on_grid(d) {
                return Err(Error::Config(format!("time step {d} is not a multiple of {h}")));
            }
            let steps = self.solver.t_end / d;
            if (steps - steps.round()).abs() > 1e-9 * steps {
                return Err(Error::Config(format!(
                    "t_end = {} is not a multiple of dt = {d}",
                    self.solver.t_end
                )));
            }
        }
        let count = (self.solver.t_end / h).round() as usize;
        if count > 1 << 24 {
            return Err(Error::Config(format!("noise grid of {count} steps is too large")));
        }
        Ok(uniform_grid(self.solver.t_end, count + 1))
    }

    pub fn initial_datum(&self) -> Result<WaveField> {
        Ok(WaveField::gaussian_packet(self.torus()?, self.initial.width, self.initial.k0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let cfg = SolverConfig::default();
        cfg.validate().unwrap();
        let back = SolverConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.hash(), cfg.hash());
        assert_eq!(cfg.noise_times().unwrap().len(), (1 << 13) + 1);
    }

    #[test]
    fn partial_files_fill_in_defaults() {
        let cfg = SolverConfig::from_toml("seed = 7\n[noise]\nhurst = 0.8\n").unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.noise.hurst, 0.8);
        assert_eq!(cfg.noise.modes, NoiseConfig::default().modes);
        assert_eq!(cfg.grid, GridConfig::default());
        let msg = SolverConfig::from_toml("[noise]\nhurst = 0.4\n").unwrap_err().to_string();
        assert!(msg.contains("(1/2, 1)"), "{msg}");
    }

    #[test]
    fn hash_ignores_execution_settings() {
        let cfg = SolverConfig::default();
        let mut other = cfg.clone();
        other.out = PathBuf::from("elsewhere");
        other.workers = 3;
        assert_eq!(cfg.hash(), other.hash());
        other.seed += 1;
        assert_ne!(cfg.hash(), other.hash());
    }

    #[test]
    fn rejects_bad_hurst_with_interval() {
        let mut cfg = SolverConfig::default();
        cfg.noise.hurst = 0.4;
        let msg = cfg.validate().unwrap_err().to_string();
        assert!(msg.contains("(1/2, 1)"), "{msg}");
    }

    #[test]
    fn rejects_bad_fields() {
        let mut cfg = SolverConfig::default();
        cfg.solver.alpha = 0.2;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let mut cfg = SolverConfig::default();
        cfg.grid.n = 100;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let mut cfg = SolverConfig::default();
        cfg.grid.dim = 4;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let mut cfg = SolverConfig::default();
        cfg.solver.dt = vec![0.3];
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        assert!(SolverConfig::from_toml("experiment = \"solve\"\nbogus = 1").is_err());
    }

    #[test]
    fn experiment_names() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
        }
        assert!("nope".parse::<Experiment>().is_err());
    }
}
