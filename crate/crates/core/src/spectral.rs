//! Periodic grids and FFT-based spectral calculus.
//!
//! A [`Torus`] is the box `[0, L)^n` sampled at `N` points per axis, stored
//! row-major with axis 0 slowest. Fourier coefficients are normalized against
//! the orthonormal basis `e^{ik·x}/L^{n/2}`, so `sobolev_norm(u, 0)` is the
//! continuum `L²` norm of the trigonometric interpolant of `u`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Torus {
    pub dim: usize,
    pub n: usize,
    pub length: f64,
}

impl Torus {
    pub fn new(dim: usize, n: usize, length: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::Config(format!("dimension must be 1, 2 or 3, got {dim}")));
        }
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::Config(format!("grid size per axis must be a power of two ≥ 2, got {n}")));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::Config(format!("box length must be positive, got {length}")));
        }
        Ok(Self { dim, n, length })
    }

    /// Total number of grid points `N^n`.
    pub fn size(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Volume of one grid cell, the weight of the periodic trapezoid rule.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn volume(&self) -> f64 {
        self.length.powi(self.dim as i32)
    }

    /// Per-axis integer indices of flat index `idx`; unused axes are 0.
    pub fn multi_index(&self, mut idx: usize) -> [usize; 3] {
        let mut out = [0; 3];
        for d in (0..self.dim).rev() {
            out[d] = idx % self.n;
            idx /= self.n;
        }
        out
    }

    /// Coordinates of grid point `idx`; unused axes are 0.
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let m = self.multi_index(idx);
        let h = self.spacing();
        [m[0] as f64 * h, m[1] as f64 * h, m[2] as f64 * h]
    }

    /// Signed frequency index of FFT bin `j`; the Nyquist bin maps to `−N/2`.
    pub fn signed_mode(&self, j: usize) -> i64 {
        if j < self.n / 2 {
            j as i64
        } else {
            j as i64 - self.n as i64
        }
    }

    /// Physical wavenumber of signed mode `m`.
    pub fn wavenumber(&self, m: i64) -> f64 {
        2.0 * PI * m as f64 / self.length
    }

    /// The same box at a different resolution.
    pub fn with_resolution(&self, n: usize) -> Result<Self> {
        Torus::new(self.dim, n, self.length)
    }
}

/// FFT plans and wavenumber tables for one torus. Cheap to clone.
#[derive(Clone)]
pub struct Spectral {
    torus: Torus,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// `|k|²` per flat Fourier index.
    k2: Arc<Vec<f64>>,
    /// Wavenumber per FFT bin of one axis, Nyquist included.
    k_axis: Arc<Vec<f64>>,
    /// Wavenumber per FFT bin with the Nyquist bin zeroed (odd derivatives).
    k_axis_odd: Arc<Vec<f64>>,
    dealias_mask: Arc<Vec<bool>>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("torus", &self.torus).finish()
    }
}

impl Spectral {
    pub fn new(torus: Torus) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(torus.n);
        let inverse = planner.plan_fft_inverse(torus.n);
        let k_axis: Vec<f64> = (0..torus.n).map(|j| torus.wavenumber(torus.signed_mode(j))).collect();
        let k_axis_odd: Vec<f64> =
            (0..torus.n).map(|j| if j == torus.n / 2 { 0.0 } else { k_axis[j] }).collect();
        let cutoff = torus.n as i64 / 3;
        let size = torus.size();
        let mut k2 = vec![0.0; size];
        let mut dealias_mask = vec![true; size];
        for idx in 0..size {
            let m = torus.multi_index(idx);
            for &j in &m[..torus.dim] {
                k2[idx] += k_axis[j] * k_axis[j];
                if torus.signed_mode(j).abs() > cutoff {
                    dealias_mask[idx] = false;
                }
            }
        }
        Self {
            torus,
            forward,
            inverse,
            k2: Arc::new(k2),
            k_axis: Arc::new(k_axis),
            k_axis_odd: Arc::new(k_axis_odd),
            dealias_mask: Arc::new(dealias_mask),
        }
    }

    pub fn torus(&self) -> &Torus {
        &self.torus
    }

    /// `|k|²` per flat Fourier index.
    pub fn k2(&self) -> &[f64] {
        &self.k2
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len == self.torus.size() {
            Ok(())
        } else {
            Err(Error::shape(self.torus.size(), len))
        }
    }

    fn transform(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.torus.n;
        let dim = self.torus.dim;
        let size = data.len();
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for axis in 0..dim {
            let stride = n.pow((dim - 1 - axis) as u32);
            if stride == 1 {
                fft.process_with_scratch(data, &mut scratch);
                continue;
            }
            let block = stride * n;
            for base in (0..size).step_by(block) {
                for offset in 0..stride {
                    let start = base + offset;
                    for (j, slot) in line.iter_mut().enumerate() {
                        *slot = data[start + j * stride];
                    }
                    fft.process_with_scratch(&mut line, &mut scratch);
                    for (j, v) in line.iter().enumerate() {
                        data[start + j * stride] = *v;
                    }
                }
            }
        }
    }

    /// Unnormalized forward DFT `U_k = Σ_j u_j e^{−ik·x_j}` in place.
    pub fn forward_in_place(&self, data: &mut [Complex64]) {
        debug_assert_eq!(data.len(), self.torus.size());
        self.transform(data, &self.forward);
    }

    /// Inverse of [`Spectral::forward_in_place`], including the `1/N^n` factor.
    pub fn inverse_in_place(&self, data: &mut [Complex64]) {
        debug_assert_eq!(data.len(), self.torus.size());
        self.transform(data, &self.inverse);
        let scale = 1.0 / data.len() as f64;
        data.iter_mut().for_each(|z| *z *= scale);
    }

    pub fn forward(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut out = values.to_vec();
        self.forward_in_place(&mut out);
        out
    }

    pub fn forward_real(&self, values: &[f64]) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward_in_place(&mut out);
        out
    }

    pub fn inverse(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let mut out = coeffs.to_vec();
        self.inverse_in_place(&mut out);
        out
    }

    /// Factor converting `|U_k|²` into `|û_k|²` for the orthonormal basis.
    fn coefficient_scale(&self) -> f64 {
        let size = self.torus.size() as f64;
        self.torus.volume() / (size * size)
    }

    /// Spectral `H^m` norm `(Σ_k (1+|k|²)^m |û_k|²)^{1/2}`; `m` may be negative.
    pub fn sobolev_norm(&self, values: &[Complex64], m: f64) -> Result<f64> {
        self.check_len(values.len())?;
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numerical("Sobolev norm of a non-finite grid function".into()));
        }
        let coeffs = self.forward(values);
        Ok(self.sobolev_norm_coeffs(&coeffs, m))
    }

    pub fn sobolev_norm_real(&self, values: &[f64], m: f64) -> Result<f64> {
        let c: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.sobolev_norm(&c, m)
    }

    /// [`Spectral::sobolev_norm`] for coefficients already in the Fourier domain.
    pub fn sobolev_norm_coeffs(&self, coeffs: &[Complex64], m: f64) -> f64 {
        let sum: f64 = if m == 0.0 {
            coeffs.iter().map(|z| z.norm_sqr()).sum()
        } else {
            coeffs.iter().zip(self.k2.iter()).map(|(z, k2)| (1.0 + k2).powf(m) * z.norm_sqr()).sum()
        };
        (sum * self.coefficient_scale()).sqrt()
    }

    /// `L²` inner product `∫ conj(f) g` by the periodic trapezoid rule.
    pub fn inner(&self, f: &[Complex64], g: &[Complex64]) -> Complex64 {
        let s: Complex64 = f.iter().zip(g).map(|(a, b)| a.conj() * b).sum();
        s * self.torus.cell_volume()
    }

    pub fn l2_norm(&self, f: &[Complex64]) -> f64 {
        (f.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.torus.cell_volume()).sqrt()
    }

    /// `∫ f dx` by the periodic trapezoid rule.
    pub fn integrate(&self, f: &[Complex64]) -> Complex64 {
        f.iter().sum::<Complex64>() * self.torus.cell_volume()
    }

    pub fn integrate_real(&self, f: &[f64]) -> f64 {
        f.iter().sum::<f64>() * self.torus.cell_volume()
    }

    /// Wavenumber of flat Fourier index `idx` along `axis`.
    fn k_component(&self, idx: usize, axis: usize, odd: bool) -> f64 {
        let j = self.torus.multi_index(idx)[axis];
        if odd {
            self.k_axis_odd[j]
        } else {
            self.k_axis[j]
        }
    }

    /// Multiply Fourier coefficients by `i k_axis` (Nyquist bin zeroed).
    pub fn derivative_coeffs(&self, coeffs: &[Complex64], axis: usize) -> Vec<Complex64> {
        coeffs
            .iter()
            .enumerate()
            .map(|(idx, z)| Complex64::new(0.0, self.k_component(idx, axis, true)) * z)
            .collect()
    }

    /// Spectral gradient, one component per axis.
    pub fn gradient(&self, values: &[Complex64]) -> Vec<Vec<Complex64>> {
        let coeffs = self.forward(values);
        (0..self.torus.dim)
            .map(|axis| {
                let mut d = self.derivative_coeffs(&coeffs, axis);
                self.inverse_in_place(&mut d);
                d
            })
            .collect()
    }

    /// Spectral gradient of a real field.
    pub fn gradient_real(&self, values: &[f64]) -> Vec<Vec<f64>> {
        let c: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.gradient(&c).into_iter().map(|g| g.into_iter().map(|z| z.re).collect()).collect()
    }

    pub fn laplacian(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut c = self.forward(values);
        c.iter_mut().zip(self.k2.iter()).for_each(|(z, k2)| *z *= -k2);
        self.inverse_in_place(&mut c);
        c
    }

    pub fn laplacian_real(&self, values: &[f64]) -> Vec<f64> {
        let c: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.laplacian(&c).into_iter().map(|z| z.re).collect()
    }

    /// Zero every Fourier coefficient with some `|m_axis| > N/3` (2/3 rule).
    pub fn dealias_coeffs(&self, coeffs: &mut [Complex64]) {
        for (z, keep) in coeffs.iter_mut().zip(self.dealias_mask.iter()) {
            if !keep {
                *z = Complex64::new(0.0, 0.0);
            }
        }
    }

    pub fn dealias(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut c = self.forward(values);
        self.dealias_coeffs(&mut c);
        self.inverse_in_place(&mut c);
        c
    }

    /// Exact free Schrödinger flow `e^{iτΔ}` in place.
    pub fn free_flow_in_place(&self, values: &mut [Complex64], tau: f64) {
        self.forward_in_place(values);
        for (z, k2) in values.iter_mut().zip(self.k2.iter()) {
            *z *= Complex64::from_polar(1.0, -k2 * tau);
        }
        self.inverse_in_place(values);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn torus1(n: usize, l: f64) -> Torus {
        Torus::new(1, n, l).unwrap()
    }

    #[test]
    fn torus_validation() {
        assert!(Torus::new(4, 8, 1.0).is_err());
        assert!(Torus::new(1, 12, 1.0).is_err());
        assert!(Torus::new(2, 8, 0.0).is_err());
        assert_eq!(Torus::new(3, 4, 1.0).unwrap().size(), 64);
    }

    #[test]
    fn constant_on_unit_torus() {
        let sp = Spectral::new(Torus::new(2, 8, 1.0).unwrap());
        let u = vec![Complex64::new(-3.0, 0.0); 64];
        for m in [0.0, 1.0, 2.5] {
            assert!((sp.sobolev_norm(&u, m).unwrap() - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_mode_h1() {
        let t = torus1(32, 2.0 * PI);
        let sp = Spectral::new(t);
        let k = 3.0;
        let u: Vec<Complex64> =
            (0..32).map(|j| Complex64::from_polar(1.0 / (2.0 * PI).sqrt(), k * t.point(j)[0])).collect();
        let h1 = sp.sobolev_norm(&u, 1.0).unwrap();
        assert!((h1 - (1.0 + k * k).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn parseval() {
        let t = Torus::new(2, 16, 3.0).unwrap();
        let sp = Spectral::new(t);
        let u: Vec<Complex64> = (0..t.size())
            .map(|i| {
                let x = t.point(i);
                Complex64::new((x[0] * 1.3).sin() + x[1], (x[0] * x[1]).cos())
            })
            .collect();
        let a = sp.sobolev_norm(&u, 0.0).unwrap();
        let b = sp.l2_norm(&u);
        assert!((a - b).abs() < 1e-12 * b);
    }

    #[test]
    fn derivatives_of_trig_polynomial() {
        let t = Torus::new(2, 32, 2.0).unwrap();
        let sp = Spectral::new(t);
        let w = PI;
        let u: Vec<Complex64> = (0..t.size())
            .map(|i| {
                let x = t.point(i);
                Complex64::new((w * x[0]).sin() * (2.0 * w * x[1]).cos(), 0.0)
            })
            .collect();
        let g = sp.gradient(&u);
        let lap = sp.laplacian(&u);
        for i in 0..t.size() {
            let x = t.point(i);
            let gx = w * (w * x[0]).cos() * (2.0 * w * x[1]).cos();
            let gy = -2.0 * w * (w * x[0]).sin() * (2.0 * w * x[1]).sin();
            assert!((g[0][i].re - gx).abs() < 1e-10);
            assert!((g[1][i].re - gy).abs() < 1e-10);
            assert!((lap[i].re + 5.0 * w * w * u[i].re).abs() < 1e-9);
        }
    }

    #[test]
    fn roundtrip_3d() {
        let t = Torus::new(3, 8, 1.0).unwrap();
        let sp = Spectral::new(t);
        let u: Vec<Complex64> = (0..t.size()).map(|i| Complex64::new(i as f64, -(i as f64).sqrt())).collect();
        let back = sp.inverse(&sp.forward(&u));
        for (a, b) in u.iter().zip(&back) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn dealias_removes_high_modes() {
        let t = torus1(16, 2.0 * PI);
        let sp = Spectral::new(t);
        let u: Vec<Complex64> = (0..16)
            .map(|j| {
                let x = t.point(j)[0];
                Complex64::new((2.0 * x).cos() + (7.0 * x).sin(), 0.0)
            })
            .collect();
        let d = sp.dealias(&u);
        for (j, dj) in d.iter().enumerate() {
            let x = t.point(j)[0];
            assert!((dj.re - (2.0 * x).cos()).abs() < 1e-12);
        }
    }
}
