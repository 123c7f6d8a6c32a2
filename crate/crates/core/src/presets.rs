//! Parameter sets and initial conditions of the reference scenarios.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::model::{FieldState, ModelParams};

/// All (+) particles in the left well and all (-) in the right, with total
/// population `2 amplitude^2`.
pub fn plus_left_minus_right(amplitude: f64) -> FieldState {
    FieldState { l_plus: Complex64::new(amplitude, 0.0), r_minus: Complex64::new(amplitude, 0.0), ..Default::default() }
}

/// [`plus_left_minus_right`] with total population one.
pub fn default_initial_state() -> FieldState {
    plus_left_minus_right(FRAC_1_SQRT_2)
}

/// Stability diagram parameters, `u_s = 1`, `u_c = 0.9`.
pub fn stability_params() -> ModelParams {
    ModelParams::new(1.0, 1.0, 0.9)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DynamicsPreset {
    pub params: ModelParams,
    pub tau_end: f64,
}

pub fn hermitian_rabi() -> DynamicsPreset {
    DynamicsPreset { params: ModelParams::new(1.0, 0.0, 0.0), tau_end: 40.0 }
}

pub fn unbalanced_decay() -> DynamicsPreset {
    DynamicsPreset { params: ModelParams::new(1.0, 0.0, 0.0).with_site_gamma(0.1, -0.2), tau_end: 40.0 }
}

/// Balanced gain and loss `gamma = 0.1 J` with the given interactions.
pub fn pt_interacting(u_s: f64, u_c: f64) -> DynamicsPreset {
    DynamicsPreset { params: ModelParams::pt(u_s, u_c, 0.1), tau_end: 400.0 }
}

/// Gate time-series parameters: `u_s = 1`, `u_c = 0.5`, `gamma = 0.1 J`.
pub fn gate_series_params() -> ModelParams {
    ModelParams::pt(1.0, 0.5, 0.1)
}

/// `(u_s, u_c, gamma)` with reference SWAP fidelities at `tJ = pi/2`.
pub const FIDELITY_CASES: [(f64, f64, f64, f64); 8] = [
    (0.0, 0.0, 0.1, 0.992),
    (0.0, 0.0, 0.3, 0.935),
    (1.0, 1.0, 0.1, 0.991),
    (1.0, 1.0, 0.3, 0.922),
    (1.0, 1.0, 0.5, 0.799),
    (1.0, 0.5, 0.1, 0.982),
    (1.0, 0.1, 0.1, 0.963),
    (1.0, 0.1, 0.3, 0.867),
];
