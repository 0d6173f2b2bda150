//! Complex grid functions on a periodic box.

use std::io::Write;

use num_complex::Complex64;

use crate::spectral::Torus;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    pub torus: Torus,
    pub values: Vec<Complex64>,
}

impl WaveField {
    pub fn new(torus: Torus, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != torus.size() {
            return Err(Error::shape(torus.size(), values.len()));
        }
        Ok(Self { torus, values })
    }

    pub fn zeros(torus: Torus) -> Self {
        Self { torus, values: vec![Complex64::new(0.0, 0.0); torus.size()] }
    }

    /// Evaluate `f` at every grid point.
    pub fn from_fn(torus: Torus, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let values = (0..torus.size()).map(|i| f(&torus.point(i)[..torus.dim])).collect();
        Self { torus, values }
    }

    /// `e^{i k·x}` for the integer mode vector `modes` (one entry per axis).
    pub fn plane_wave(torus: Torus, modes: &[i64]) -> Self {
        let k: Vec<f64> = modes.iter().map(|&m| torus.wavenumber(m)).collect();
        Self::from_fn(torus, |x| {
            let phase: f64 = x.iter().zip(&k).map(|(a, b)| a * b).sum();
            Complex64::from_polar(1.0, phase)
        })
    }

    /// Gaussian packet `exp(−|x−c|²/(2w²) + i k0·x)` centred in the box.
    pub fn gaussian_packet(torus: Torus, width: f64, k0: f64) -> Self {
        let c = 0.5 * torus.length;
        Self::from_fn(torus, |x| {
            let r2: f64 = x.iter().map(|v| (v - c) * (v - c)).sum();
            Complex64::from_polar((-r2 / (2.0 * width * width)).exp(), k0 * x[0])
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub(crate) fn check_same_grid(&self, other: &WaveField) -> Result<()> {
        if self.torus != other.torus {
            return Err(Error::shape(format!("{:?}", self.torus), format!("{:?}", other.torus)));
        }
        Ok(())
    }

    /// Discrete `L²` norm (periodic trapezoid rule).
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.torus.cell_volume()).sqrt()
    }

    /// `L²` distance to `other`.
    pub fn l2_distance(&self, other: &WaveField) -> Result<f64> {
        self.check_same_grid(other)?;
        let s: f64 = self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm_sqr()).sum();
        Ok((s * self.torus.cell_volume()).sqrt())
    }

    pub fn max_abs_diff(&self, other: &WaveField) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    pub fn scale(&mut self, c: Complex64) {
        self.values.iter_mut().for_each(|z| *z *= c);
    }

    /// `self += c·other`.
    pub fn axpy(&mut self, c: Complex64, other: &WaveField) -> Result<()> {
        self.check_same_grid(other)?;
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += c * b;
        }
        Ok(())
    }

    /// Pointwise multiplication by `e^{i s θ(x)}`.
    pub fn apply_phase(&mut self, theta: &[f64], s: f64) {
        for (z, th) in self.values.iter_mut().zip(theta) {
            *z *= Complex64::from_polar(1.0, s * th);
        }
    }

    /// Flat little-endian binary: interleaved `(re, im)` 64-bit reals, row-major.
    pub fn write_binary<W: Write>(&self, out: W) -> std::io::Result<()> {
        let flat: Vec<f64> = self.values.iter().flat_map(|z| [z.re, z.im]).collect();
        write_f64_le(out, &flat)
    }
}

/// Write reals as consecutive little-endian 64-bit floats.
pub fn write_f64_le<W: Write>(mut out: W, values: &[f64]) -> std::io::Result<()> {
    let mut buf = Vec::with_capacity(values.len() * 8);
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&buf)
}

/// Inverse of [`write_f64_le`].
pub fn read_f64_le(bytes: &[u8]) -> Result<Vec<f64>> {
    if !bytes.len().is_multiple_of(8) {
        return Err(Error::shape("a multiple of 8 bytes", bytes.len()));
    }
    Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8"))).collect())
}
