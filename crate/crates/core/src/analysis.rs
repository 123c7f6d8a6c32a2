//! Scalar summaries of sampled time series: decay rates, envelope
//! modulation, revivals.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
}

/// Ordinary least squares `y ~ slope * x + intercept`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidParameter { name: "series", reason: "need two or more paired samples".into() });
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    if sxx == 0.0 || !sxy.is_finite() {
        return Err(Error::InvalidParameter { name: "series", reason: "degenerate abscissa".into() });
    }
    let slope = sxy / sxx;
    Ok(LinearFit { slope, intercept: my - slope * mx })
}

/// Exponential rate `r` of `values ~ A exp(r t)`, fitted on the logarithm.
pub fn fit_log_rate(times: &[f64], values: &[f64]) -> Result<f64> {
    if values.iter().any(|&v| !(v.is_finite() && v > 0.0)) {
        return Err(Error::InvalidParameter { name: "series", reason: "log fit needs positive finite values".into() });
    }
    let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    Ok(linear_fit(times, &logs)?.slope)
}

/// Peak `|signal|` over consecutive windows of length `window`, reported at
/// the window centers. A trailing partial window is dropped.
pub fn window_envelope(times: &[f64], signal: &[f64], window: f64) -> Vec<(f64, f64)> {
    let (Some(&t0), Some(&t1)) = (times.first(), times.last()) else { return Vec::new() };
    if window.is_nan() || window <= 0.0 {
        return Vec::new();
    }
    let count = ((t1 - t0) / window + 1e-9).floor() as usize;
    let mut peaks = vec![0.0f64; count];
    for (&t, &s) in times.iter().zip(signal) {
        let k = ((t - t0) / window).floor() as usize;
        if k < count {
            peaks[k] = peaks[k].max(s.abs());
        }
    }
    peaks.into_iter().enumerate().map(|(k, p)| (t0 + (k as f64 + 0.5) * window, p)).collect()
}

fn parabolic_vertex(x: [f64; 3], y: [f64; 3]) -> f64 {
    let denom = (x[0] - x[1]) * (x[0] - x[2]) * (x[1] - x[2]);
    let a = (x[2] * (y[1] - y[0]) + x[1] * (y[0] - y[2]) + x[0] * (y[2] - y[1])) / denom;
    let b = (x[2] * x[2] * (y[0] - y[1]) + x[1] * x[1] * (y[2] - y[0]) + x[0] * x[0] * (y[1] - y[2])) / denom;
    if a == 0.0 {
        x[1]
    } else {
        (-b / (2.0 * a)).clamp(x[0], x[2])
    }
}

fn extrema(env: &[(f64, f64)], minima: bool, level: f64) -> Vec<f64> {
    let sign = if minima { -1.0 } else { 1.0 };
    (1..env.len().saturating_sub(1))
        .filter(|&k| {
            let (a, b, c) = (sign * env[k - 1].1, sign * env[k].1, sign * env[k + 1].1);
            b > a && b >= c && sign * env[k].1 > sign * level
        })
        .map(|k| parabolic_vertex([env[k - 1].0, env[k].0, env[k + 1].0], [env[k - 1].1, env[k].1, env[k + 1].1]))
        .collect()
}

/// Period of a slow amplitude modulation `cos(2 pi t / T)` riding on a
/// carrier with period `carrier_window`. The envelope `|cos|` has nodes every
/// `T / 2`, so the period is twice their mean spacing. Only envelope minima
/// below half of the envelope's maximum count as nodes.
pub fn modulation_period(times: &[f64], signal: &[f64], carrier_window: f64) -> Option<f64> {
    let env = window_envelope(times, signal, carrier_window);
    let top = env.iter().map(|e| e.1).fold(0.0, f64::max);
    let nodes = extrema(&env, true, 0.5 * top);
    if nodes.len() < 2 {
        return None;
    }
    let spacing = (nodes[nodes.len() - 1] - nodes[0]) / (nodes.len() - 1) as f64;
    Some(2.0 * spacing)
}

/// Times where the windowed envelope returns to a local maximum of at least
/// `fraction` of its largest value, after having first dropped below it.
pub fn revival_times(times: &[f64], signal: &[f64], carrier_window: f64, fraction: f64) -> Vec<f64> {
    let env = window_envelope(times, signal, carrier_window);
    let top = env.iter().map(|e| e.1).fold(0.0, f64::max);
    let level = fraction * top;
    let Some(first_drop) = env.iter().position(|e| e.1 < level) else { return Vec::new() };
    let peaks = extrema(&env, false, level);
    let drop_time = env[first_drop].0;
    peaks.into_iter().filter(|&t| t > drop_time).collect()
}

/// Largest pointwise `|a - b|`; NaN entries are skipped.
pub fn max_abs_deviation(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).filter(|d| !d.is_nan()).fold(0.0, f64::max)
}
