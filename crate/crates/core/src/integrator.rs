//! Explicit Runge-Kutta integration with uniform sampling and blow-up
//! detection.
//!
//! Two methods are available: classic fixed-step RK4 and the Dormand-Prince
//! 5(4) pair with PI step-size control. Adaptive runs are resampled onto a
//! uniform grid with a cubic Hermite interpolant built from the step end
//! points and their derivatives.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{observables, FieldState, FullState, Mode, Observables, ZPhiState};

/// A state that can be flattened into real components.
pub trait Packed: Clone {
    const DIM: usize;

    fn pack(&self, out: &mut [f64]);

    fn unpack(data: &[f64]) -> Self;

    /// Largest population carried by the state, compared against the
    /// blow-up threshold.
    fn max_population(&self) -> f64;
}

impl Packed for FieldState {
    const DIM: usize = 8;

    fn pack(&self, out: &mut [f64]) {
        for (i, m) in Mode::ALL.into_iter().enumerate() {
            out[2 * i] = self[m].re;
            out[2 * i + 1] = self[m].im;
        }
    }

    fn unpack(data: &[f64]) -> Self {
        FieldState::from_fn(|m| {
            let i = m as usize;
            num_complex::Complex64::new(data[2 * i], data[2 * i + 1])
        })
    }

    fn max_population(&self) -> f64 {
        Mode::ALL.iter().map(|&m| self[m].norm_sqr()).fold(0.0, f64::max)
    }
}

impl Packed for FullState {
    const DIM: usize = 12;

    fn pack(&self, out: &mut [f64]) {
        self.fields.pack(&mut out[..8]);
        for (i, m) in Mode::ALL.into_iter().enumerate() {
            out[8 + i] = self.reservoirs[m];
        }
    }

    fn unpack(data: &[f64]) -> Self {
        FullState {
            fields: FieldState::unpack(&data[..8]),
            reservoirs: crate::model::ReservoirState::from_fn(|m| data[8 + m as usize]),
        }
    }

    fn max_population(&self) -> f64 {
        self.fields.max_population()
    }
}

impl Packed for ZPhiState {
    const DIM: usize = 4;

    fn pack(&self, out: &mut [f64]) {
        out.copy_from_slice(&self.to_array());
    }

    fn unpack(data: &[f64]) -> Self {
        ZPhiState::new(data[0], data[1], data[2], data[3])
    }

    fn max_population(&self) -> f64 {
        0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum Method {
    /// Classic fourth-order Runge-Kutta with a fixed step.
    Rk4 { dt: f64 },
    /// Dormand-Prince 5(4) with PI step control.
    Rk45 { rtol: f64, atol: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    #[serde(flatten)]
    pub method: Method,
    /// Final time in units of `1/J`.
    pub t_end: f64,
    /// Spacing of the output samples.
    pub sample_every: f64,
    /// A population above this ends the run as divergent.
    pub blowup_threshold: f64,
}

pub const DEFAULT_BLOWUP_THRESHOLD: f64 = 1e6;

impl IntegratorConfig {
    pub fn rk45(t_end: f64, sample_every: f64) -> Self {
        IntegratorConfig {
            method: Method::Rk45 { rtol: 1e-10, atol: 1e-12 },
            t_end,
            sample_every,
            blowup_threshold: DEFAULT_BLOWUP_THRESHOLD,
        }
    }

    pub fn rk4(dt: f64, t_end: f64, sample_every: f64) -> Self {
        IntegratorConfig { method: Method::Rk4 { dt }, t_end, sample_every, blowup_threshold: DEFAULT_BLOWUP_THRESHOLD }
    }

    pub fn with_tolerances(mut self, rtol: f64, atol: f64) -> Self {
        self.method = Method::Rk45 { rtol, atol };
        self
    }

    pub fn with_t_end(mut self, t_end: f64) -> Self {
        self.t_end = t_end;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter { name, reason: format!("must be finite and > 0, got {v}") })
            }
        };
        match self.method {
            Method::Rk4 { dt } => positive("dt", dt)?,
            Method::Rk45 { rtol, atol } => {
                positive("rtol", rtol)?;
                positive("atol", atol)?;
            }
        }
        positive("t_end", self.t_end)?;
        positive("sample_every", self.sample_every)?;
        positive("blowup_threshold", self.blowup_threshold)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
    /// Time at which a population first exceeded the blow-up threshold.
    pub diverged_at: Option<f64>,
    pub stats: Stats,
}

impl<S> Trajectory<S> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, &S)> {
        Some((*self.times.last()?, self.states.last()?))
    }
}

impl Trajectory<FieldState> {
    pub fn observables(&self) -> Vec<Observables> {
        self.states.iter().map(observables).collect()
    }
}

impl Trajectory<FullState> {
    pub fn observables(&self) -> Vec<Observables> {
        self.states.iter().map(|s| observables(&s.fields)).collect()
    }
}

/// Integrates `dy/dtau = rhs(tau, y)` from `tau = 0`.
///
/// Samples are emitted every `sample_every` (RK4: every step count closest
/// to it) and at `t_end`. A population above `blowup_threshold`, or a
/// non-finite state, stops the run with `diverged_at` set; that is data, not
/// an error. The adaptive method fails only when the step size underflows.
pub fn integrate<S, F>(rhs: F, state0: &S, cfg: &IntegratorConfig) -> Result<Trajectory<S>>
where
    S: Packed,
    F: FnMut(f64, &S) -> S,
{
    cfg.validate()?;
    let mut system = System::new(rhs);
    let mut y0 = vec![0.0; S::DIM];
    state0.pack(&mut y0);
    match cfg.method {
        Method::Rk4 { dt } => fixed_rk4(&mut system, y0, dt, cfg),
        Method::Rk45 { rtol, atol } => dormand_prince(&mut system, y0, rtol, atol, cfg),
    }
}

struct System<S, F> {
    rhs: F,
    evals: usize,
    _state: std::marker::PhantomData<S>,
}

impl<S: Packed, F: FnMut(f64, &S) -> S> System<S, F> {
    fn new(rhs: F) -> Self {
        System { rhs, evals: 0, _state: std::marker::PhantomData }
    }

    fn eval(&mut self, t: f64, y: &[f64], dy: &mut [f64]) {
        self.evals += 1;
        let d = (self.rhs)(t, &S::unpack(y));
        d.pack(dy);
    }
}

fn blown_up<S: Packed>(y: &[f64], threshold: f64) -> bool {
    y.iter().any(|v| !v.is_finite()) || S::unpack(y).max_population() > threshold
}

fn fixed_rk4<S, F>(system: &mut System<S, F>, y0: Vec<f64>, dt: f64, cfg: &IntegratorConfig) -> Result<Trajectory<S>>
where
    S: Packed,
    F: FnMut(f64, &S) -> S,
{
    let n = S::DIM;
    let steps = ((cfg.t_end / dt) - 1e-9).ceil().max(1.0) as usize;
    let h = cfg.t_end / steps as f64;
    let stride = ((cfg.sample_every / h).round() as usize).max(1);

    let mut traj =
        Trajectory { times: vec![0.0], states: vec![S::unpack(&y0)], diverged_at: None, stats: Stats::default() };
    let mut y = y0;
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);

    for step in 0..steps {
        let t = step as f64 * h;
        system.eval(t, &y, &mut k1);
        for i in 0..n {
            tmp[i] = y[i] + 0.5 * h * k1[i];
        }
        system.eval(t + 0.5 * h, &tmp, &mut k2);
        for i in 0..n {
            tmp[i] = y[i] + 0.5 * h * k2[i];
        }
        system.eval(t + 0.5 * h, &tmp, &mut k3);
        for i in 0..n {
            tmp[i] = y[i] + h * k3[i];
        }
        system.eval(t + h, &tmp, &mut k4);
        for i in 0..n {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        traj.stats.accepted += 1;

        let t_new = if step + 1 == steps { cfg.t_end } else { (step + 1) as f64 * h };
        if blown_up::<S>(&y, cfg.blowup_threshold) {
            traj.times.push(t_new);
            traj.states.push(S::unpack(&y));
            traj.diverged_at = Some(t_new);
            break;
        }
        if (step + 1) % stride == 0 || step + 1 == steps {
            traj.times.push(t_new);
            traj.states.push(S::unpack(&y));
        }
    }
    traj.stats.rhs_evals = system.evals;
    Ok(traj)
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b_hat
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;
const PI_ALPHA: f64 = 0.7 / 5.0;
const PI_BETA: f64 = 0.4 / 5.0;

fn error_norm(err: &[f64], y: &[f64], y_new: &[f64], rtol: f64, atol: f64) -> f64 {
    let sum: f64 = err
        .iter()
        .zip(y.iter().zip(y_new))
        .map(|(e, (a, b))| {
            let scale = atol + rtol * a.abs().max(b.abs());
            (e / scale).powi(2)
        })
        .sum();
    (sum / err.len() as f64).sqrt()
}

fn initial_step<S, F>(system: &mut System<S, F>, y: &[f64], f0: &[f64], rtol: f64, atol: f64) -> f64
where
    S: Packed,
    F: FnMut(f64, &S) -> S,
{
    let n = y.len();
    let scale: Vec<f64> = y.iter().map(|v| atol + rtol * v.abs()).collect();
    let rms = |v: &[f64]| (v.iter().zip(&scale).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / n as f64).sqrt();
    let d0 = rms(y);
    let d1 = rms(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1: Vec<f64> = y.iter().zip(f0).map(|(a, b)| a + h0 * b).collect();
    let mut f1 = vec![0.0; n];
    system.eval(h0, &y1, &mut f1);
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = rms(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(1.0 / 5.0) };
    (100.0 * h0).min(h1)
}

#[allow(clippy::too_many_arguments)]
fn hermite(t0: f64, y0: &[f64], f0: &[f64], t1: f64, y1: &[f64], f1: &[f64], t: f64, out: &mut [f64]) {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    for i in 0..out.len() {
        out[i] = h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i];
    }
}

/// `0, dt, 2 dt, ...` up to and including `t_end`; a grid point closer than
/// `1e-9 dt` to `t_end` is replaced by `t_end` itself.
pub fn uniform_grid(t_end: f64, dt: f64) -> Vec<f64> {
    let mut grid: Vec<f64> = (0..).map(|k| k as f64 * dt).take_while(|&t| t < t_end - 1e-9 * dt).collect();
    grid.push(t_end);
    grid
}

fn dormand_prince<S, F>(
    system: &mut System<S, F>,
    y0: Vec<f64>,
    rtol: f64,
    atol: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory<S>>
where
    S: Packed,
    F: FnMut(f64, &S) -> S,
{
    let n = S::DIM;
    let t_end = cfg.t_end;
    let sample_times = uniform_grid(t_end, cfg.sample_every);

    let mut traj =
        Trajectory { times: vec![0.0], states: vec![S::unpack(&y0)], diverged_at: None, stats: Stats::default() };
    let mut next_sample = 1usize;

    let mut t = 0.0;
    let mut y = y0;
    let mut f = vec![0.0; n];
    system.eval(t, &y, &mut f);
    let mut h = initial_step(system, &y, &f, rtol, atol).min(t_end);
    let mut prev_err: f64 = 1e-4;

    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut k5 = vec![0.0; n];
    let mut k6 = vec![0.0; n];
    let mut k7 = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut err = vec![0.0; n];
    let mut sample = vec![0.0; n];

    while t < t_end {
        let remaining = t_end - t;
        let last = h >= remaining * (1.0 - 1e-12);
        if last {
            h = remaining;
        }
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(Error::StepUnderflow { tau: t });
        }

        let k1 = &f;
        for i in 0..n {
            tmp[i] = y[i] + h * A21 * k1[i];
        }
        system.eval(t + C2 * h, &tmp, &mut k2);
        for i in 0..n {
            tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        system.eval(t + C3 * h, &tmp, &mut k3);
        for i in 0..n {
            tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        system.eval(t + C4 * h, &tmp, &mut k4);
        for i in 0..n {
            tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        system.eval(t + C5 * h, &tmp, &mut k5);
        for i in 0..n {
            tmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        system.eval(t + h, &tmp, &mut k6);
        for i in 0..n {
            y_new[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        }
        let t_new = if last { t_end } else { t + h };
        system.eval(t_new, &y_new, &mut k7);
        for i in 0..n {
            err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let err_norm = error_norm(&err, &y, &y_new, rtol, atol);

        if !err_norm.is_finite() || err_norm > 1.0 {
            traj.stats.rejected += 1;
            let factor = if err_norm.is_finite() { (SAFETY * err_norm.powf(-1.0 / 5.0)).max(FAC_MIN) } else { FAC_MIN };
            h *= factor;
            continue;
        }

        traj.stats.accepted += 1;
        while next_sample < sample_times.len() && sample_times[next_sample] <= t_new {
            let ts = sample_times[next_sample];
            if ts == t_new {
                sample.copy_from_slice(&y_new);
            } else {
                hermite(t, &y, &f, t_new, &y_new, &k7, ts, &mut sample);
            }
            traj.times.push(ts);
            traj.states.push(S::unpack(&sample));
            next_sample += 1;
        }

        t = t_new;
        std::mem::swap(&mut y, &mut y_new);
        std::mem::swap(&mut f, &mut k7);

        if blown_up::<S>(&y, cfg.blowup_threshold) {
            if *traj.times.last().unwrap() < t {
                traj.times.push(t);
                traj.states.push(S::unpack(&y));
            }
            traj.diverged_at = Some(t);
            break;
        }

        let err_clamped = err_norm.max(1e-10);
        let factor = (SAFETY * err_clamped.powf(-PI_ALPHA) * prev_err.powf(PI_BETA)).clamp(FAC_MIN, FAC_MAX);
        prev_err = err_clamped;
        h *= factor;
    }
    traj.stats.rhs_evals = system.evals;
    Ok(traj)
}

/// Result of an RK4 self-convergence study.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub dt: f64,
    /// End-state errors at `dt` and `dt/2`, measured against a `dt/8` run.
    pub errors: [f64; 2],
    /// Fitted order; `None` when the errors vanish and no order can be fitted.
    pub order: Option<f64>,
}

/// Measures the RK4 order from end-state errors at `dt` and `dt/2` against a
/// `dt/8` reference run.
pub fn convergence_order<S, F>(mut rhs: F, state0: &S, t_end: f64, dt: f64) -> Result<ConvergenceReport>
where
    S: Packed,
    F: FnMut(f64, &S) -> S,
{
    let mut end_state = |step: f64| -> Result<Vec<f64>> {
        let cfg = IntegratorConfig::rk4(step, t_end, t_end);
        let traj = integrate(&mut rhs, state0, &cfg)?;
        let mut out = vec![0.0; S::DIM];
        traj.states.last().expect("trajectory has the initial sample").pack(&mut out);
        Ok(out)
    };
    let reference = end_state(dt / 8.0)?;
    let coarse = end_state(dt)?;
    let fine = end_state(dt / 2.0)?;
    let distance = |a: &[f64]| a.iter().zip(&reference).map(|(x, r)| (x - r).powi(2)).sum::<f64>().sqrt();
    let errors = [distance(&coarse), distance(&fine)];
    let order = (errors[0] > 0.0 && errors[1] > 0.0).then(|| (errors[0] / errors[1]).log2());
    Ok(ConvergenceReport { dt, errors, order })
}
