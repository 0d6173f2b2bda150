//! Least-squares helpers shared by the estimators.

use crate::{Error, Result};

/// Ordinary least-squares slope and intercept of `ys` against `xs`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() {
        return Err(Error::shape(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(Error::Estimation(format!(
            "need at least two points for a regression, got {}",
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    if sxx == 0.0 {
        return Err(Error::Estimation("regressor has zero spread".into()));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Slope of `log(ys)` against `log(xs)`. All inputs must be strictly positive.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.iter().chain(ys).any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::Estimation("log-log regression requires strictly positive finite data".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &ly).map(|(slope, _)| slope)
}

/// Discrete Hölder seminorm `max_{i<j} |v_j − v_i| / (t_j − t_i)^γ` over all grid pairs.
pub fn holder_seminorm(times: &[f64], values: &[f64], gamma: f64) -> f64 {
    let mut best: f64 = 0.0;
    for i in 0..times.len() {
        for j in i + 1..times.len() {
            let q = (values[j] - values[i]).abs() / (times[j] - times[i]).powf(gamma);
            best = best.max(q);
        }
    }
    best
}

/// Discrete `C^{0,γ}` norm: sup norm plus [`holder_seminorm`].
pub fn holder_norm(times: &[f64], values: &[f64], gamma: f64) -> f64 {
    values.iter().fold(0.0f64, |m, v| m.max(v.abs())) + holder_seminorm(times, values, gamma)
}
