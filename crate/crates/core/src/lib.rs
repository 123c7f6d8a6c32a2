//! Mean-field dynamics of a two-species polariton mixture in a PT-symmetric
//! double well.
//!
//! Time is measured as `tau = t J` and amplitudes in units of `sqrt(N)`;
//! interactions enter as `u_s = g_s N / J` and `u_c = g_c N / J`. Three
//! descriptions are available: the full model with exciton reservoirs, the
//! reduced model with phenomenological gain and loss, and the population
//! imbalance / phase representation for balanced parameters.

pub mod analysis;
pub mod error;
pub mod evolve;
pub mod gate;
pub mod integrator;
pub mod linear;
pub mod model;
pub mod presets;
pub mod stability;

pub use error::{Error, Result};
pub use evolve::{evolve_full, evolve_reduced, evolve_zphi};
pub use integrator::{integrate, IntegratorConfig, Method, Trajectory};
pub use model::{FieldState, FullState, Mode, ModelParams, PerMode, ReservoirChannel, ReservoirParams, ZPhiState};
