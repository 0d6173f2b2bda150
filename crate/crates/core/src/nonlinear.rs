//! Gauge-invariant nonlinearities `g(Ψ) = W[Ψ]·Ψ` with a real potential `W`.
//!
//! Both supported kinds depend on `Ψ` only through `|Ψ|²` apart from the
//! trailing factor `Ψ`, which makes them commute with multiplication by
//! `e^{iθ(x)}` and keeps `Im(g(Ψ)Ψ̄) = 0`. The phase flow `∂_tΨ = −i g(Ψ)`
//! therefore leaves `|Ψ|` unchanged and is solved exactly by
//! `Ψ ← e^{−iτW[Ψ]}Ψ`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::spectral::Spectral;
use crate::wave::WaveField;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Nonlinearity {
    #[default]
    None,
    /// `μ|Ψ|^{2σ}Ψ`.
    Power { sigma: f64, mu: f64 },
    /// `c·V[Ψ]Ψ` with the periodic Coulomb potential of `|Ψ|²`; `n = 3` only.
    Hartree { coupling: f64 },
}

impl Nonlinearity {
    pub fn name(&self) -> &'static str {
        match self {
            Nonlinearity::None => "none",
            Nonlinearity::Power { .. } => "power",
            Nonlinearity::Hartree { .. } => "hartree",
        }
    }

    pub fn is_none(&self) -> bool {
        matches!(self, Nonlinearity::None)
    }

    /// Check the kind against dimension `dim` and data regularity `q`.
    pub fn validate(&self, dim: usize, q: i32) -> Result<()> {
        match *self {
            Nonlinearity::None => Ok(()),
            Nonlinearity::Power { sigma, mu } => {
                if !(sigma.is_finite() && sigma >= 0.0) || !mu.is_finite() {
                    return Err(Error::Config(format!(
                        "power nonlinearity needs finite σ ≥ 0 and finite μ, got σ = {sigma}, μ = {mu}"
                    )));
                }
                if dim > 1 && q == 2 && sigma < 0.5 {
                    return Err(Error::Config(format!(
                        "power nonlinearity with n = {dim} > 1 and q = 2 needs σ ≥ 1/2, got {sigma}"
                    )));
                }
                Ok(())
            }
            Nonlinearity::Hartree { coupling } => {
                if dim != 3 {
                    return Err(Error::Config(format!(
                        "the Hartree nonlinearity is defined for n = 3 only, got n = {dim}"
                    )));
                }
                if !coupling.is_finite() {
                    return Err(Error::Config("Hartree coupling must be finite".into()));
                }
                Ok(())
            }
        }
    }

    /// Real potential `W[Ψ]` with `g(Ψ) = W[Ψ]Ψ`.
    pub fn phase_rate(&self, sp: &Spectral, psi: &WaveField) -> Result<Vec<f64>> {
        match *self {
            Nonlinearity::None => Ok(vec![0.0; psi.len()]),
            Nonlinearity::Power { sigma, mu } => Ok(psi
                .values
                .iter()
                .map(|z| {
                    let r2 = z.norm_sqr();
                    if sigma == 0.0 {
                        mu
                    } else if r2 == 0.0 {
                        0.0
                    } else {
                        mu * r2.powf(sigma)
                    }
                })
                .collect()),
            Nonlinearity::Hartree { coupling } => {
                Ok(hartree_potential(sp, psi)?.into_iter().map(|v| coupling * v).collect())
            }
        }
    }

    /// `g(Ψ)` on the grid.
    pub fn apply(&self, sp: &Spectral, psi: &WaveField) -> Result<WaveField> {
        let w = self.phase_rate(sp, psi)?;
        Ok(WaveField { torus: psi.torus, values: psi.values.iter().zip(&w).map(|(z, r)| z * r).collect() })
    }

    /// Exact solution of `∂_tΨ = −i g(Ψ)` over time `tau`.
    pub fn phase_flow(&self, sp: &Spectral, psi: &mut WaveField, tau: f64) -> Result<()> {
        if self.is_none() {
            return Ok(());
        }
        let w = self.phase_rate(sp, psi)?;
        psi.apply_phase(&w, -tau);
        Ok(())
    }
}

fn hartree_coeffs(sp: &Spectral, psi: &WaveField) -> Result<Vec<Complex64>> {
    if psi.torus.dim != 3 {
        return Err(Error::Config(format!(
            "the Hartree potential is defined for n = 3 only, got n = {}",
            psi.torus.dim
        )));
    }
    if psi.torus != *sp.torus() {
        return Err(Error::shape(format!("{:?}", sp.torus()), format!("{:?}", psi.torus)));
    }
    let density: Vec<f64> = psi.values.iter().map(|z| z.norm_sqr()).collect();
    let mut hat = sp.forward_real(&density);
    for (z, k2) in hat.iter_mut().zip(sp.k2()) {
        *z = if *k2 == 0.0 { Complex64::new(0.0, 0.0) } else { *z * (4.0 * PI / k2) };
    }
    sp.inverse_in_place(&mut hat);
    Ok(hat)
}

/// Periodic Coulomb potential of `|Ψ|²`: `V̂(k) = 4π ρ̂(k)/|k|²`, `V̂(0) = 0`.
pub fn hartree_potential(sp: &Spectral, psi: &WaveField) -> Result<Vec<f64>> {
    Ok(hartree_coeffs(sp, psi)?.into_iter().map(|z| z.re).collect())
}

/// [`hartree_potential`] before discarding the (rounding-level) imaginary part.
pub fn hartree_potential_complex(sp: &Spectral, psi: &WaveField) -> Result<Vec<Complex64>> {
    hartree_coeffs(sp, psi)
}

/// `‖g(Ψ₁) − g(Ψ₂)‖_{H^p} / ‖Ψ₁ − Ψ₂‖_{H^p}`.
pub fn lipschitz_probe(
    sp: &Spectral,
    psi1: &WaveField,
    psi2: &WaveField,
    g: &Nonlinearity,
    p: f64,
) -> Result<f64> {
    psi1.check_same_grid(psi2)?;
    let diff: Vec<Complex64> = psi1.values.iter().zip(&psi2.values).map(|(a, b)| a - b).collect();
    let den = sp.sobolev_norm(&diff, p)?;
    if den == 0.0 {
        return Err(Error::Estimation("Lipschitz ratio is undefined for identical inputs".into()));
    }
    let g1 = g.apply(sp, psi1)?;
    let g2 = g.apply(sp, psi2)?;
    let gd: Vec<Complex64> = g1.values.iter().zip(&g2.values).map(|(a, b)| a - b).collect();
    Ok(sp.sobolev_norm(&gd, p)? / den)
}

/// `‖g(e^{iθ}Ψ) − e^{iθ}g(Ψ)‖_{L²}`.
pub fn gauge_defect(sp: &Spectral, psi: &WaveField, theta: &[f64], g: &Nonlinearity) -> Result<f64> {
    let mut rotated = psi.clone();
    rotated.apply_phase(theta, 1.0);
    let lhs = g.apply(sp, &rotated)?;
    let mut rhs = g.apply(sp, psi)?;
    rhs.apply_phase(theta, 1.0);
    lhs.l2_distance(&rhs)
}

/// `max_x |Im(g(Ψ)Ψ̄)|`.
pub fn charge_symmetry_defect(sp: &Spectral, psi: &WaveField, g: &Nonlinearity) -> Result<f64> {
    let gp = g.apply(sp, psi)?;
    Ok(gp.values.iter().zip(&psi.values).map(|(a, b)| (a * b.conj()).im.abs()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Torus;

    fn torus3(n: usize, l: f64) -> (Torus, Spectral) {
        let t = Torus::new(3, n, l).unwrap();
        (t, Spectral::new(t))
    }

    #[test]
    fn none_and_zero_inputs() {
        let t = Torus::new(1, 8, 1.0).unwrap();
        let sp = Spectral::new(t);
        let psi = WaveField::plane_wave(t, &[1]);
        let g = Nonlinearity::None.apply(&sp, &psi).unwrap();
        assert!(g.values.iter().all(|z| z.norm() == 0.0));
        let p = Nonlinearity::Power { sigma: 0.7, mu: 2.0 };
        let g = p.apply(&sp, &WaveField::zeros(t)).unwrap();
        assert!(g.values.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn cubic_on_constant() {
        let t = Torus::new(2, 4, 1.0).unwrap();
        let sp = Spectral::new(t);
        let c = Complex64::new(0.6, -0.8) * 1.5;
        let psi = WaveField::from_fn(t, |_| c);
        let g = Nonlinearity::Power { sigma: 1.0, mu: 1.0 }.apply(&sp, &psi).unwrap();
        for z in &g.values {
            assert!((z - c * c.norm_sqr()).norm() < 1e-14);
        }
    }

    #[test]
    fn validation_rules() {
        assert!(Nonlinearity::Hartree { coupling: 1.0 }.validate(1, 1).is_err());
        assert!(Nonlinearity::Hartree { coupling: 1.0 }.validate(3, 1).is_ok());
        assert!(Nonlinearity::Power { sigma: 0.25, mu: 1.0 }.validate(2, 2).is_err());
        assert!(Nonlinearity::Power { sigma: 0.25, mu: 1.0 }.validate(1, 2).is_ok());
        assert!(Nonlinearity::Power { sigma: -1.0, mu: 1.0 }.validate(1, 0).is_err());
        let t = Torus::new(2, 4, 1.0).unwrap();
        let sp = Spectral::new(t);
        assert!(Nonlinearity::Hartree { coupling: 1.0 }.apply(&sp, &WaveField::zeros(t)).is_err());
    }

    #[test]
    fn hartree_single_mode() {
        let l = 3.0;
        let (t, sp) = torus3(8, l);
        let w = 2.0 * PI / l;
        let psi = WaveField::from_fn(t, |x| Complex64::new((1.0 + (w * x[0]).cos()).sqrt(), 0.0));
        let v = hartree_potential(&sp, &psi).unwrap();
        for (i, vi) in v.iter().enumerate() {
            let x = t.point(i);
            let expect = l * l / PI * (w * x[0]).cos();
            assert!((vi - expect).abs() < 1e-12, "{vi} vs {expect}");
        }
        let vc = hartree_potential_complex(&sp, &psi).unwrap();
        assert!(vc.iter().all(|z| z.im.abs() < 1e-13));
    }

    #[test]
    fn hartree_uniform_density() {
        let (t, sp) = torus3(4, 1.0);
        let psi = WaveField::from_fn(t, |x| Complex64::from_polar(2.0, x[1]));
        assert!(hartree_potential(&sp, &psi).unwrap().iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn linear_power_ratio_and_identical_inputs() {
        let t = Torus::new(1, 16, 1.0).unwrap();
        let sp = Spectral::new(t);
        let a = WaveField::plane_wave(t, &[1]);
        let b = WaveField::from_fn(t, |x| Complex64::new(x[0], 0.3));
        let g = Nonlinearity::Power { sigma: 0.0, mu: -2.5 };
        let r = lipschitz_probe(&sp, &a, &b, &g, 1.0).unwrap();
        assert!((r - 2.5).abs() < 1e-12);
        assert!(lipschitz_probe(&sp, &a, &a, &g, 1.0).is_err());
        let g3 = Nonlinearity::Power { sigma: 1.0, mu: 1.0 };
        let r1 = lipschitz_probe(&sp, &a, &b, &g3, 1.0).unwrap();
        let r2 = lipschitz_probe(&sp, &b, &a, &g3, 1.0).unwrap();
        assert!((r1 - r2).abs() < 1e-12 * r1);
    }

    #[test]
    fn phase_flow_preserves_modulus() {
        let t = Torus::new(1, 32, 1.0).unwrap();
        let sp = Spectral::new(t);
        let mut psi = WaveField::from_fn(t, |x| Complex64::new(1.0 + x[0], x[0] * x[0]));
        let before: Vec<f64> = psi.values.iter().map(|z| z.norm()).collect();
        Nonlinearity::Power { sigma: 1.5, mu: 3.0 }.phase_flow(&sp, &mut psi, 0.7).unwrap();
        for (z, m) in psi.values.iter().zip(&before) {
            assert!((z.norm() - m).abs() < 1e-14);
        }
    }
}
