//! Statistical and refinement oracles: Monte-Carlo laws, closed-form
//! fractional derivatives, and convergence under grid refinement.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use fsse_core::diagnostics::convergence_order;
use fsse_core::fbm::{structure_exponent, uniform_grid, FbmSampler, LagWindow};
use fsse_core::fraccalc::{weyl_left, weyl_right};
use fsse_core::qnoise::window_steps;
use fsse_core::sse::{classical_residual, solve_direct, solve_gauge, trajectory_holder};
use fsse_core::{
    FbmMethod, FracConfig, MagneticPropagator, NoiseField, NoiseSpectrum, Nonlinearity, Problem,
    SampledFunction, Scheme, Spectral, Torus, WaveField,
};

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (m, xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0))
}

#[test]
fn field_variance_matches_the_spectrum() {
    let t = Torus::new(1, 32, 2.0 * PI).unwrap();
    let s = NoiseSpectrum::build(1, 2.0 * PI, 6, 7.0, 0).unwrap();
    let times = uniform_grid(1.0, 17);
    let hurst = 0.7;
    let samples = 4000;
    let fields: Vec<NoiseField> = (0..samples as u64)
        .into_par_iter()
        .map(|seed| NoiseField::sample(&s, t, &times, hurst, seed).unwrap())
        .collect();
    // Standard error of a sample variance is about sqrt(2/M); allow 5 of them.
    let tol = 5.0 * (2.0 / samples as f64).sqrt();
    for (k, xi) in [(16, 0), (8, 5), (4, 11), (16, 23)] {
        let vals: Vec<f64> = fields.iter().map(|f| f.values(k)[xi]).collect();
        let (_, var) = mean_var(&vals);
        let expect = s.pointwise_variance(&t.point(xi)[..1], times[k], hurst);
        assert!((var / expect - 1.0).abs() < tol, "t = {}, x index {xi}: sample {var} vs {expect}", times[k]);
    }
}

#[test]
fn increments_are_stationary_for_both_samplers() {
    let hurst = 0.75;
    let times = uniform_grid(1.0, 129);
    let samples = 4000;
    let tol = 5.0 * (2.0 / samples as f64).sqrt();
    for method in [FbmMethod::Circulant, FbmMethod::Cholesky] {
        let sampler = FbmSampler::new(hurst, &times, method).unwrap();
        let paths: Vec<Vec<f64>> =
            (0..samples as u64).into_par_iter().map(|seed| sampler.sample(seed).values).collect();
        for lag in [1usize, 8, 32] {
            let expect = (lag as f64 / 128.0).powf(2.0 * hurst);
            for start in [0usize, 48, 128 - lag] {
                let inc: Vec<f64> = paths.iter().map(|p| p[start + lag] - p[start]).collect();
                let (_, var) = mean_var(&inc);
                assert!(
                    (var / expect - 1.0).abs() < tol,
                    "{method:?} lag {lag} at {start}: {var} vs {expect}"
                );
            }
        }
        // Marginal variances t^{2H}.
        for k in [16usize, 64, 128] {
            let vals: Vec<f64> = paths.iter().map(|p| p[k]).collect();
            let (_, var) = mean_var(&vals);
            let expect = times[k].powf(2.0 * hurst);
            assert!((var / expect - 1.0).abs() < tol, "{method:?} t = {}: {var}", times[k]);
        }
    }
}

#[test]
fn noise_is_holder_in_the_high_norm() {
    let q = 0;
    let t = Torus::new(1, 64, 2.0 * PI).unwrap();
    let sp = Spectral::new(t);
    let s = NoiseSpectrum::build(1, 2.0 * PI, 8, 11.0, q).unwrap();
    let times = uniform_grid(1.0, 1025);
    for hurst in [0.6, 0.75, 0.9] {
        let field = NoiseField::sample(&s, t, &times, hurst, 7).unwrap();
        let lags = LagWindow::finest(times.len(), 6).lag_steps(times.len() - 1);
        let est = structure_exponent(times.len(), 1.0 / 1024.0, &lags, |i, j| {
            sp.sobolev_norm_real(&field.increment(i, j), (q + 4) as f64).unwrap().powi(2)
        })
        .unwrap();
        for gamma in [hurst - 0.1, hurst - 0.05] {
            assert!(est >= gamma, "H = {hurst}: exponent {est} < {gamma}");
        }
    }
}

#[test]
fn cached_gradients_match_finite_differences_at_second_order() {
    let s = NoiseSpectrum::build(1, 2.0 * PI, 4, 7.0, 0).unwrap();
    let times = uniform_grid(1.0, 5);
    let errors: Vec<f64> = [64usize, 128, 256]
        .iter()
        .map(|&n| {
            let t = Torus::new(1, n, 2.0 * PI).unwrap();
            let snap = NoiseField::sample(&s, t, &times, 0.75, 3).unwrap().snapshot(4);
            let h = t.spacing();
            (0..n)
                .map(|i| {
                    let fd = (snap.b[(i + 1) % n] - snap.b[(i + n - 1) % n]) / (2.0 * h);
                    (fd - snap.grad[0][i]).abs()
                })
                .fold(0.0, f64::max)
        })
        .collect();
    for w in errors.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.5..4.5).contains(&ratio), "{errors:?}");
    }
}

/// `D^α_{T−}(T−s)^m = Γ(m+1)/Γ(m+1−α) (T−t)^{m−α}` in the real convention.
fn right_monomial(m: f64, alpha: f64, u: f64) -> f64 {
    use statrs::function::gamma::gamma;
    gamma(m + 1.0) / gamma(m + 1.0 - alpha) * u.powf(m - alpha)
}

#[test]
fn right_derivatives_compose() {
    let (alpha, beta, m) = (0.2, 0.3, 2.0);
    let times = uniform_grid(1.0, 2049);
    let f = SampledFunction::from_fn(&times, |s| (1.0 - s).powf(m)).unwrap();
    let cb = FracConfig::new(beta).unwrap();
    let inner: Vec<f64> =
        times.iter().map(|&t| if t < 1.0 { weyl_right(&f, &cb, t, 1.0).unwrap() } else { 0.0 }).collect();
    let inner = SampledFunction::new(times.clone(), inner).unwrap();
    let ca = FracConfig::new(alpha).unwrap();
    let cab = FracConfig::new(alpha + beta).unwrap();
    for t in [0.0, 0.25, 0.5, 0.75] {
        let composed = weyl_right(&inner, &ca, t, 1.0).unwrap();
        let direct = weyl_right(&f, &cab, t, 1.0).unwrap();
        let exact = right_monomial(m, alpha + beta, 1.0 - t);
        assert!((direct - exact).abs() < 1e-4 * exact, "t = {t}: {direct} vs {exact}");
        assert!((composed - direct).abs() < 1e-3 * exact, "t = {t}: {composed} vs {direct}");
    }
}

#[test]
fn derivatives_of_mollified_paths_approach_the_slope() {
    let times = uniform_grid(1.0, 1025);
    let h = 1.0 / 1024.0;
    let s = NoiseSpectrum::constant(1, 2.0 * PI, 1.0, 0);
    let t = Torus::new(1, 4, 2.0 * PI).unwrap();
    let field = NoiseField::sample(&s, t, &times, 0.75, 11).unwrap();
    let smooth = field.mollify(1.0 / 16.0).unwrap();
    assert!(window_steps(1.0 / 16.0, h) > 1);
    let path = SampledFunction::new(times.clone(), smooth.mode_path(0).to_vec()).unwrap();
    let k = 600;
    let left_slope = (path.values()[k] - path.values()[k - 1]) / h;
    let right_slope = (path.values()[k + 1] - path.values()[k]) / h;
    let errs: Vec<(f64, f64)> = [0.9, 0.99, 0.999]
        .iter()
        .map(|&a| {
            let cfg = FracConfig::new(a).unwrap();
            let l = weyl_left(&path, &cfg, times[k]).unwrap();
            let r = weyl_right(&path, &cfg, times[k], 1.0).unwrap();
            ((l - left_slope).abs(), (r + right_slope).abs())
        })
        .collect();
    for w in errs.windows(2) {
        assert!(w[1].0 < w[0].0 && w[1].1 < w[0].1, "{errs:?}");
    }
    let scale = left_slope.abs().max(1.0);
    assert!(errs[2].0 < 0.05 * scale && errs[2].1 < 0.05 * scale, "{errs:?}");
}

#[test]
fn magnetic_propagation_converges_under_refinement() {
    let length = 2.0 * PI;
    let s = NoiseSpectrum::build(1, length, 4, 7.0, 0).unwrap();
    let times = uniform_grid(0.5, 257);
    let phi_on = |t: Torus| {
        WaveField::from_fn(t, |x| Complex64::new((x[0]).cos(), 0.5 * (2.0 * x[0]).sin()) * (x[0].sin()).exp())
    };
    let run = |n: usize, stride: usize| -> WaveField {
        let t = Torus::new(1, n, length).unwrap();
        let field = NoiseField::sample(&s, t, &times, 0.75, 5).unwrap();
        let prop = MagneticPropagator::new(Spectral::new(t), Scheme::CrankNicolsonMag);
        prop.evolve(&phi_on(t), &field, 0, 256, stride, None).unwrap().pop().unwrap()
    };
    let reference = run(128, 2);
    let gaps: Vec<f64> = [(16usize, 32usize), (32, 16), (64, 8)]
        .iter()
        .map(|&(n, stride)| {
            let coarse = run(n, stride);
            let step = 128 / n;
            let d: f64 = (0..n).map(|i| (coarse.values[i] - reference.values[i * step]).norm_sqr()).sum();
            (d * length / n as f64).sqrt()
        })
        .collect();
    assert!(gaps[1] < gaps[0] && gaps[2] < gaps[1], "{gaps:?}");
}

#[test]
fn solution_inherits_the_noise_regularity() {
    let length = 8.0 * PI;
    let t = Torus::new(1, 128, length).unwrap();
    let s = NoiseSpectrum::build(1, length, 8, 9.0, 2).unwrap();
    let hurst = 0.75;
    let field = NoiseField::sample(&s, t, &uniform_grid(1.0, 1025), hurst, 21).unwrap();
    let p = Problem::new(&field, Nonlinearity::Power { sigma: 1.0, mu: 1.0 }).unwrap();
    let psi0 = WaveField::gaussian_packet(t, 2.0, 1.0);
    let traj = solve_direct(&p, &psi0, 1.0 / 1024.0, 1.0).unwrap();
    let est = trajectory_holder(&p.spectral, &traj, 0.0, LagWindow::finest(traj.len(), 6)).unwrap();
    for gamma in [0.6, 0.7] {
        assert!(est >= gamma, "exponent {est} < {gamma}");
    }
}

#[test]
fn classical_residual_vanishes_under_refinement() {
    let length = 8.0 * PI;
    let t = Torus::new(1, 128, length).unwrap();
    let s = NoiseSpectrum::build(1, length, 8, 9.0, 2).unwrap();
    let field = NoiseField::sample(&s, t, &uniform_grid(1.0, 1025), 0.75, 5).unwrap();
    let p = Problem::new(&field, Nonlinearity::Power { sigma: 1.0, mu: 0.5 }).unwrap();
    let psi0 = WaveField::gaussian_packet(t, 2.0, 1.0);
    let cfg = FracConfig::stochastic(0.4, 0.75).unwrap();
    let steps: Vec<f64> = [16u32, 32, 64, 128, 256, 512].iter().map(|&m| 1.0 / m as f64).collect();
    for gauge in [false, true] {
        let res: Vec<f64> = steps
            .iter()
            .map(|&dt| {
                let traj = if gauge {
                    solve_gauge(&p, &psi0, dt, 1.0, Scheme::CrankNicolsonMag).unwrap()
                } else {
                    solve_direct(&p, &psi0, dt, 1.0).unwrap()
                };
                classical_residual(&p, &traj, traj.len() - 1, &cfg).unwrap()
            })
            .collect();
        // Individual levels can plateau; the trend is what must hold.
        let order = convergence_order(&steps, &res).unwrap().order;
        assert!(order > 1.0, "gauge = {gauge}: order {order}, {res:?}");
        assert!(res[5] < res[0] / 20.0, "gauge = {gauge}: {res:?}");
    }
}
