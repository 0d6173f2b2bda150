//! Marchaud derivatives, the `Λ_α` functional and the `W_{α,1}` norm.

use rayon::prelude::*;

use super::{gamma, FracConfig, Sample, SampledFunction};
use crate::{Error, Result};

/// `∫_{t_0}^{t_M} (f(t_M) − f(s)) (t_M − s)^{−α−1} ds` for the interpolant,
/// skipping the `excise` cells next to `t_M`.
fn marchaud_integral<T: Sample>(f: &SampledFunction<T>, alpha: f64, excise: usize) -> T {
    let times = f.times();
    let values = f.values();
    let last = times.len() - 1;
    let t = times[last];
    let ft = values[last];
    let mut acc = T::default();
    for k in 0..last.saturating_sub(excise) {
        let m = f.slope(k);
        let u1 = t - times[k + 1];
        let u2 = t - times[k];
        // f(t) − f(s) = D + m·u with u = t − s.
        let lin = m * ((u2.powf(1.0 - alpha) - u1.powf(1.0 - alpha)) / (1.0 - alpha));
        if k + 1 == last {
            acc += lin;
        } else {
            let d = ft - values[k] - m * u2;
            acc += d * ((u1.powf(-alpha) - u2.powf(-alpha)) / alpha) + lin;
        }
    }
    acc
}

/// Left Weyl–Marchaud derivative `D^α_{a+} f(t)` with `a` the first grid time.
pub fn weyl_left<T: Sample>(f: &SampledFunction<T>, cfg: &FracConfig, t: f64) -> Result<T> {
    cfg.validate()?;
    let a = f.start();
    if !(t > a) {
        return Err(Error::Domain(format!("left derivative is singular at the base point t = {a}")));
    }
    if t > f.end() {
        return Err(Error::Domain(format!("t = {t} lies beyond the grid end {}", f.end())));
    }
    let alpha = cfg.alpha;
    let g = if t < f.end() { f.restrict(a, t)? } else { f.clone() };
    let ft = g.values()[g.len() - 1];
    let val = ft * (t - a).powf(-alpha) + marchaud_integral(&g, alpha, cfg.excised()) * alpha;
    Ok(val * (1.0 / gamma(1.0 - alpha)))
}

/// Right Weyl–Marchaud derivative on `(t, T)` in the real convention (no
/// `(−1)^α` factor): `(g(t)/(T−t)^α + α∫_t^T (g(t)−g(s))/(s−t)^{α+1} ds)/Γ(1−α)`.
pub fn weyl_right<T: Sample>(g: &SampledFunction<T>, cfg: &FracConfig, t: f64, t_end: f64) -> Result<T> {
    cfg.validate()?;
    if !(t < t_end) {
        return Err(Error::Domain(format!("right derivative is singular at the end point t = {t_end}")));
    }
    if t < g.start() || t_end > g.end() {
        return Err(Error::Domain(format!(
            "[{t}, {t_end}] is not inside the grid [{}, {}]",
            g.start(),
            g.end()
        )));
    }
    let mirrored = g.restrict(t, t_end)?.reflect();
    weyl_left(&mirrored, cfg, mirrored.end())
}

/// `∫_{u1}^{u2} |A + B u| u^β du` for `u1 ≥ 0`; requires `β + 2 > 0`, and
/// `β + 1 > 0` unless `A = 0` when `u1 = 0`.
fn abs_linear_power_integral(a: f64, b: f64, u1: f64, u2: f64, beta: f64) -> f64 {
    let p = |u: f64| {
        let first = if a == 0.0 { 0.0 } else { a * u.powf(beta + 1.0) / (beta + 1.0) };
        first + b * u.powf(beta + 2.0) / (beta + 2.0)
    };
    if b != 0.0 {
        let root = -a / b;
        if root > u1 && root < u2 {
            let pr = p(root);
            return (pr - p(u1)).abs() + (p(u2) - pr).abs();
        }
    }
    (p(u2) - p(u1)).abs()
}

/// Discrete `Λ_α(g)`: the supremum over grid pairs `t_i < t_j` at least two
/// cells apart of `|g(t_j)−g(t_i)|/(t_j−t_i)^{1−α} + α∫_{t_i}^{t_j} |g(τ)−g(t_i)|/(τ−t_i)^{2−α} dτ`,
/// divided by `Γ(1−α)Γ(α)`.
pub fn lambda_alpha(g: &SampledFunction<f64>, cfg: &FracConfig) -> Result<f64> {
    cfg.validate()?;
    let alpha = cfg.alpha;
    let times = g.times();
    let values = g.values();
    let n = times.len();
    let excise = cfg.excised();
    let sup = (0..n.saturating_sub(2))
        .into_par_iter()
        .map(|i| {
            let (ti, gi) = (times[i], values[i]);
            let mut integral = 0.0;
            let mut best: f64 = 0.0;
            for k in i..n - 1 {
                if k >= i + excise {
                    let m = g.slope(k);
                    let u1 = times[k] - ti;
                    let u2 = times[k + 1] - ti;
                    integral += if k == i {
                        m.abs() * u2.powf(alpha) / alpha
                    } else {
                        let a = values[k] - gi - m * u1;
                        abs_linear_power_integral(a, m, u1, u2, alpha - 2.0)
                    };
                }
                let j = k + 1;
                if j >= i + 2 {
                    let q = (values[j] - gi).abs() / (times[j] - ti).powf(1.0 - alpha) + alpha * integral;
                    best = best.max(q);
                }
            }
            best
        })
        .reduce(|| 0.0, f64::max);
    Ok(sup / (gamma(1.0 - alpha) * gamma(alpha)))
}

/// `‖f‖_{α,1} = ∫_a^T (|f(s)|/(s−a)^α + ∫_a^s |f(s)−f(τ)|/(s−τ)^{α+1} dτ) ds`.
///
/// The first term and the inner integral are exact for the interpolant; the
/// outer integral of the inner one uses the trapezoid rule on the grid.
pub fn w_alpha1_norm(f: &SampledFunction<f64>, cfg: &FracConfig) -> Result<f64> {
    cfg.validate()?;
    let alpha = cfg.alpha;
    let times = f.times();
    let values = f.values();
    let n = times.len();
    let a0 = times[0];
    let excise = cfg.excised();

    let mut first = 0.0;
    for k in 0..n - 1 {
        let m = f.slope(k);
        let u1 = times[k] - a0;
        let u2 = times[k + 1] - a0;
        let a = values[k] - m * u1;
        first += abs_linear_power_integral(a, m, u1, u2, -alpha);
    }

    let inner: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|j| {
            let (tj, fj) = (times[j], values[j]);
            (0..j.saturating_sub(excise))
                .map(|k| {
                    let m = f.slope(k);
                    let u1 = tj - times[k + 1];
                    let u2 = tj - times[k];
                    if k + 1 == j {
                        m.abs() * u2.powf(1.0 - alpha) / (1.0 - alpha)
                    } else {
                        let d = fj - values[k] - m * u2;
                        abs_linear_power_integral(d, m, u1, u2, -alpha - 1.0)
                    }
                })
                .sum()
        })
        .collect();
    let second: f64 = (0..n - 1).map(|k| 0.5 * (inner[k] + inner[k + 1]) * (times[k + 1] - times[k])).sum();
    Ok(first + second)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fbm::uniform_grid;
    use crate::fraccalc::CutoffPolicy;
    use std::f64::consts::PI;

    fn cfg(alpha: f64) -> FracConfig {
        FracConfig::new(alpha).unwrap()
    }

    #[test]
    fn left_of_constant() {
        let f = SampledFunction::from_fn(&uniform_grid(2.0, 9), |_| 3.0).unwrap();
        for t in [0.25, 1.0, 1.6, 2.0] {
            let v = weyl_left(&f, &cfg(0.3), t).unwrap();
            let expect = 3.0 / (gamma(0.7) * t.powf(0.3));
            assert!((v - expect).abs() < 1e-12, "{t}: {v} vs {expect}");
        }
    }

    #[test]
    fn left_of_identity_is_exact() {
        let f = SampledFunction::from_fn(&uniform_grid(1.0, 17), |t| t).unwrap();
        let v = weyl_left(&f, &cfg(0.5), 1.0).unwrap();
        assert!((v - 2.0 / PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn left_of_square() {
        let f = SampledFunction::from_fn(&uniform_grid(1.0, 4097), |t| t * t).unwrap();
        let v = weyl_left(&f, &cfg(0.5), 1.0).unwrap();
        let expect = gamma(3.0) / gamma(2.5);
        // Interpolation error is amplified by the kernel to O(h^{2−α}).
        assert!((v - 1.504506).abs() < 1e-5 && (v - expect).abs() < 1e-5, "{v}");
        let coarse = SampledFunction::from_fn(&uniform_grid(1.0, 1025), |t| t * t).unwrap();
        let vc = weyl_left(&coarse, &cfg(0.5), 1.0).unwrap();
        assert!((v - expect).abs() < (vc - expect).abs() / 4.0);
    }

    #[test]
    fn left_at_base_point_is_an_error() {
        let f = SampledFunction::from_fn(&uniform_grid(1.0, 5), |t| t).unwrap();
        assert!(weyl_left(&f, &cfg(0.5), 0.0).is_err());
    }

    #[test]
    fn right_mirrors_left() {
        let f = SampledFunction::from_fn(&uniform_grid(1.0, 33), |t| 1.0 - t).unwrap();
        let v = weyl_right(&f, &cfg(0.5), 0.0, 1.0).unwrap();
        assert!((v - 2.0 / PI.sqrt()).abs() < 1e-12);
        let c = SampledFunction::from_fn(&uniform_grid(1.0, 33), |_| 2.0).unwrap();
        let v = weyl_right(&c, &cfg(0.4), 0.5, 1.0).unwrap();
        assert!((v - 2.0 / (gamma(0.6) * 0.5f64.powf(0.4))).abs() < 1e-12);
        assert!(weyl_right(&c, &cfg(0.4), 1.0, 1.0).is_err());
    }

    #[test]
    fn excision_changes_little_on_smooth_input() {
        let f = SampledFunction::from_fn(&uniform_grid(1.0, 4097), |t| t * t).unwrap();
        let exact = weyl_left(&f, &cfg(0.3), 1.0).unwrap();
        let cut = FracConfig::new(0.3).unwrap().with_cutoff(CutoffPolicy::Excise { cells: 1 });
        let v = weyl_left(&f, &cut, 1.0).unwrap();
        assert!((v - exact).abs() < 1e-2 && v != exact);
    }

    #[test]
    fn abs_integral_splits_at_root() {
        // ∫_0^2 |u − 1| du = 1.
        assert!((abs_linear_power_integral(-1.0, 1.0, 0.0, 2.0, 0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn lambda_of_constant_is_zero() {
        let g = SampledFunction::from_fn(&uniform_grid(1.0, 65), |_| 1.5).unwrap();
        assert_eq!(lambda_alpha(&g, &cfg(0.4)).unwrap(), 0.0);
    }

    #[test]
    fn lambda_of_identity() {
        // For g(t) = t the bracket is 2(t−s)^α, maximal on the full interval,
        // so Λ_α = 2 sin(πα)/π on [0, 1]: increasing up to α = ½ only.
        let g = SampledFunction::from_fn(&uniform_grid(1.0, 257), |t| t).unwrap();
        let lo = lambda_alpha(&g, &cfg(0.3)).unwrap();
        let hi = lambda_alpha(&g, &cfg(0.45)).unwrap();
        assert!(lo > 0.0 && lo.is_finite());
        assert!(hi > lo);
        let expect = 2.0 * (PI * 0.3).sin() / PI;
        assert!((lo - expect).abs() < 1e-12, "{lo} vs {expect}");
    }

    #[test]
    fn w_norm_examples() {
        let zero = SampledFunction::from_fn(&uniform_grid(1.0, 65), |_| 0.0).unwrap();
        assert_eq!(w_alpha1_norm(&zero, &cfg(0.5)).unwrap(), 0.0);
        let one = SampledFunction::from_fn(&uniform_grid(1.0, 65), |_| 1.0).unwrap();
        assert!((w_alpha1_norm(&one, &cfg(0.5)).unwrap() - 2.0).abs() < 1e-12);
    }
}
