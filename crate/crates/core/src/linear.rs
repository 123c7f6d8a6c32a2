//! Closed-form evolution of the non-interacting PT dimer.
//!
//! For `g_s = g_c = 0` each species obeys
//! `d/dt (psi_L, psi_R) = [[gamma, iJ], [iJ, -gamma]] (psi_L, psi_R)`, whose
//! exponential is `cos(Omega t) + sin(Omega t)/Omega * A` with
//! `Omega = sqrt(J^2 - gamma^2)`. Past the exceptional point `Omega` becomes
//! imaginary and the same expression continues to `cosh`/`sinh`.

use std::f64::consts::PI;

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::error::{ensure_finite, Error, Result};

/// Linear evolution of one species, acting on `(psi_L, psi_R)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Propagator2(pub Matrix2<Complex64>);

impl Propagator2 {
    pub fn identity() -> Self {
        Propagator2(Matrix2::identity())
    }

    pub fn apply(&self, left: Complex64, right: Complex64) -> (Complex64, Complex64) {
        let m = &self.0;
        (m[(0, 0)] * left + m[(0, 1)] * right, m[(1, 0)] * left + m[(1, 1)] * right)
    }

    pub fn compose(&self, other: &Propagator2) -> Propagator2 {
        Propagator2(self.0 * other.0)
    }

    /// Eigenvalues from the characteristic polynomial.
    pub fn eigenvalues(&self) -> (Complex64, Complex64) {
        let m = &self.0;
        let trace = m[(0, 0)] + m[(1, 1)];
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        let disc = (trace * trace - 4.0 * det).sqrt();
        ((trace + disc) / 2.0, (trace - disc) / 2.0)
    }
}

fn rabi_frequency(j: f64, gamma: f64) -> Complex64 {
    Complex64::new(j * j - gamma * gamma, 0.0).sqrt()
}

/// `Lambda_{+-} = +-sqrt(J^2 - gamma^2)`: real in the PT-symmetric phase,
/// imaginary once `|gamma| > J`.
pub fn linear_eigenvalues(j: f64, gamma: f64) -> Result<(Complex64, Complex64)> {
    check_coupling(j, gamma)?;
    let omega = rabi_frequency(j, gamma);
    Ok((omega, -omega))
}

fn check_coupling(j: f64, gamma: f64) -> Result<()> {
    ensure_finite("J", j)?;
    ensure_finite("gamma", gamma)?;
    if j <= 0.0 {
        return Err(Error::InvalidParameter { name: "J", reason: format!("must be > 0, got {j}") });
    }
    Ok(())
}

/// Evolution matrix after time `t` for gain `gamma` on the left well and
/// loss `gamma` on the right.
pub fn propagator(j: f64, gamma: f64, t: f64) -> Result<Propagator2> {
    check_coupling(j, gamma)?;
    ensure_finite("t", t)?;
    let omega = rabi_frequency(j, gamma);
    let phase = omega * t;
    let cos = phase.cos();
    // sin(Omega t)/Omega, with its Taylor series near the exceptional point
    let sinc = if phase.norm() < 1e-4 {
        let p2 = phase * phase;
        (1.0 - p2 / 6.0 + p2 * p2 / 120.0) * t
    } else {
        phase.sin() / omega
    };
    let i = Complex64::i();
    Ok(Propagator2(Matrix2::new(cos + gamma * sinc, i * j * sinc, i * j * sinc, cos - gamma * sinc)))
}

/// Half of the effective Rabi period, `pi / (2 Omega)`.
pub fn half_rabi_time(j: f64, gamma: f64) -> Result<f64> {
    check_coupling(j, gamma)?;
    if gamma.abs() >= j {
        return Err(Error::InvalidParameter {
            name: "gamma",
            reason: format!("no oscillation for |gamma| = {} >= J", gamma.abs()),
        });
    }
    Ok(PI / (2.0 * (j * j - gamma * gamma).sqrt()))
}

/// Population left in the initial well at the half Rabi period, for one
/// species started as `(1, 0)`. Equals `gamma^2 / (J^2 - gamma^2)`.
pub fn transfer_deficit(j: f64, gamma: f64) -> Result<f64> {
    let t = half_rabi_time(j, gamma)?;
    let (left, _) = propagator(j, gamma, t)?.apply(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    Ok(left.norm_sqr())
}
