use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter `{name}` is not finite")]
    NonFinite { name: &'static str },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The z-Phi representation needs |z| < 1 for both species.
    #[error("z-Phi representation is singular at z = {z} (a well is empty)")]
    SingularRepresentation { z: f64 },

    #[error("parameters are not PT-balanced with a single gain/loss rate")]
    NotPtBalanced,

    #[error("no trivial fixed point: |gamma| = {gamma} exceeds J = {j}")]
    NoFixedPoint { gamma: f64, j: f64 },

    #[error("step size underflow at tau = {tau}")]
    StepUnderflow { tau: f64 },

    #[error("{site} well is empty; qubit amplitudes are undefined")]
    EmptyWell { site: &'static str },

    #[error("evolution of input column {column} diverged at tau = {tau}")]
    BrokenPhase { column: &'static str, tau: f64 },
}

pub(crate) fn ensure_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite { name })
    }
}
