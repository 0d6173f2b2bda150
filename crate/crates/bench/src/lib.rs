//! Fixtures shared by the benchmarks.

use fsse_core::fbm::uniform_grid;
use fsse_core::{NoiseField, Nonlinearity, Result, SolverConfig, WaveField};

/// A one-dimensional problem on `n` points with `steps + 1` noise times on `[0, 1]`.
pub struct Fixture {
    pub field: NoiseField,
    pub psi0: WaveField,
    pub nonlinearity: Nonlinearity,
}

pub fn fixture(n: usize, steps: usize) -> Result<Fixture> {
    let mut cfg = SolverConfig::default();
    cfg.grid.n = n;
    let field = NoiseField::sample(
        &cfg.spectrum()?,
        cfg.torus()?,
        &uniform_grid(1.0, steps + 1),
        cfg.noise.hurst,
        cfg.seed,
    )?;
    Ok(Fixture { field, psi0: cfg.initial_datum()?, nonlinearity: cfg.nonlinearity })
}
