//! Validated entry points that integrate one model tier.

use crate::error::Result;
use crate::integrator::{integrate, IntegratorConfig, Trajectory};
use crate::model::{
    rhs_full, rhs_reduced, zphi_derivative, FieldState, FullState, Mode, ModelParams, ReservoirParams, ZPhiState,
};

fn check_fields(fields: &FieldState) -> Result<()> {
    for m in Mode::ALL {
        crate::error::ensure_finite("initial amplitude", fields[m].re)?;
        crate::error::ensure_finite("initial amplitude", fields[m].im)?;
    }
    Ok(())
}

pub fn evolve_reduced(
    mp: &ModelParams,
    fields0: &FieldState,
    cfg: &IntegratorConfig,
) -> Result<Trajectory<FieldState>> {
    mp.validate()?;
    check_fields(fields0)?;
    integrate(|_, s| rhs_reduced(s, mp), fields0, cfg)
}

pub fn evolve_full(
    mp: &ModelParams,
    rp: &ReservoirParams,
    state0: &FullState,
    cfg: &IntegratorConfig,
) -> Result<Trajectory<FullState>> {
    mp.validate()?;
    for m in Mode::ALL {
        rp[m].validate()?;
        crate::error::ensure_finite("initial reservoir", state0.reservoirs[m])?;
    }
    check_fields(&state0.fields)?;
    integrate(
        |_, s: &FullState| {
            let (fields, reservoirs) = rhs_full(&s.fields, &s.reservoirs, mp, rp);
            FullState { fields, reservoirs }
        },
        state0,
        cfg,
    )
}

/// Integrates the z-Phi tier. Reaching `|z| = 1` makes the right-hand side
/// non-finite, which surfaces as a step-size underflow at that time.
pub fn evolve_zphi(mp: &ModelParams, state0: &ZPhiState, cfg: &IntegratorConfig) -> Result<Trajectory<ZPhiState>> {
    mp.validate()?;
    let gamma_over_j = mp.balanced_gamma()? / mp.j;
    state0.check_regular()?;
    integrate(|_, s| zphi_derivative(s, gamma_over_j, mp.u_s, mp.u_c), state0, cfg)
}
