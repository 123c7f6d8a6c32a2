//! Domain types and right-hand sides for the three model tiers.
//!
//! Amplitudes are measured in units of `sqrt(N)`, so `|psi|^2 = 1` means `N`
//! polaritons. Interactions enter as the dimensionless ratios
//! `u_s = g_s N / J` and `u_c = g_c N / J`; rates and energies (`gamma`,
//! `eps`, reservoir rates) are absolute and share the unit of `J`. Every
//! right-hand side returns a derivative with respect to `tau = t J`.

use std::f64::consts::PI;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// Tolerance used by the PT-symmetry reporter.
pub const PT_TOLERANCE: f64 = 1e-12;

/// One (well, species) slot of the four-mode system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    LPlus,
    LMinus,
    RPlus,
    RMinus,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::LPlus, Mode::LMinus, Mode::RPlus, Mode::RMinus];

    /// Same species in the opposite well (the tunnelling partner).
    pub fn other_site(self) -> Mode {
        match self {
            Mode::LPlus => Mode::RPlus,
            Mode::LMinus => Mode::RMinus,
            Mode::RPlus => Mode::LPlus,
            Mode::RMinus => Mode::LMinus,
        }
    }

    /// Opposite species in the same well (the cross-interaction partner).
    pub fn other_species(self) -> Mode {
        match self {
            Mode::LPlus => Mode::LMinus,
            Mode::LMinus => Mode::LPlus,
            Mode::RPlus => Mode::RMinus,
            Mode::RMinus => Mode::RPlus,
        }
    }

    pub fn is_left(self) -> bool {
        matches!(self, Mode::LPlus | Mode::LMinus)
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::LPlus => "L_plus",
            Mode::LMinus => "L_minus",
            Mode::RPlus => "R_plus",
            Mode::RMinus => "R_minus",
        }
    }
}

/// A value attached to each of the four modes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerMode<T> {
    #[serde(rename = "L_plus")]
    pub l_plus: T,
    #[serde(rename = "L_minus")]
    pub l_minus: T,
    #[serde(rename = "R_plus")]
    pub r_plus: T,
    #[serde(rename = "R_minus")]
    pub r_minus: T,
}

impl<T> PerMode<T> {
    pub fn from_fn(mut f: impl FnMut(Mode) -> T) -> Self {
        PerMode { l_plus: f(Mode::LPlus), l_minus: f(Mode::LMinus), r_plus: f(Mode::RPlus), r_minus: f(Mode::RMinus) }
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> PerMode<U> {
        PerMode::from_fn(|m| f(&self[m]))
    }

    pub fn iter(&self) -> impl Iterator<Item = (Mode, &T)> {
        Mode::ALL.into_iter().map(move |m| (m, &self[m]))
    }
}

impl<T: Copy> PerMode<T> {
    pub fn splat(value: T) -> Self {
        PerMode::from_fn(|_| value)
    }

    /// Exchanges the (+) and (-) species in both wells.
    pub fn species_swapped(&self) -> Self {
        PerMode::from_fn(|m| self[m.other_species()])
    }

    /// Exchanges the left and right wells.
    pub fn sites_swapped(&self) -> Self {
        PerMode::from_fn(|m| self[m.other_site()])
    }
}

impl<T> Index<Mode> for PerMode<T> {
    type Output = T;

    fn index(&self, mode: Mode) -> &T {
        match mode {
            Mode::LPlus => &self.l_plus,
            Mode::LMinus => &self.l_minus,
            Mode::RPlus => &self.r_plus,
            Mode::RMinus => &self.r_minus,
        }
    }
}

impl<T> IndexMut<Mode> for PerMode<T> {
    fn index_mut(&mut self, mode: Mode) -> &mut T {
        match mode {
            Mode::LPlus => &mut self.l_plus,
            Mode::LMinus => &mut self.l_minus,
            Mode::RPlus => &mut self.r_plus,
            Mode::RMinus => &mut self.r_minus,
        }
    }
}

/// The four complex polariton amplitudes, in units of `sqrt(N)`.
pub type FieldState = PerMode<Complex64>;

/// Exciton populations of the four reservoirs, same normalization as `N`.
pub type ReservoirState = PerMode<f64>;

impl PerMode<Complex64> {
    pub fn populations(&self) -> PerMode<f64> {
        self.map(|psi| psi.norm_sqr())
    }

    pub fn total_population(&self) -> f64 {
        Mode::ALL.iter().map(|&m| self[m].norm_sqr()).sum()
    }

    /// Total population of the (+) and (-) species.
    pub fn species_totals(&self) -> (f64, f64) {
        (self.l_plus.norm_sqr() + self.r_plus.norm_sqr(), self.l_minus.norm_sqr() + self.r_minus.norm_sqr())
    }

    pub fn conj(&self) -> Self {
        self.map(|psi| psi.conj())
    }

    pub fn is_finite(&self) -> bool {
        Mode::ALL.iter().all(|&m| self[m].is_finite())
    }

    /// Builds a state with the given per-species totals from imbalances and
    /// phase differences (left amplitudes real and non-negative).
    pub fn from_zphi(state: &ZPhiState, total_plus: f64, total_minus: f64) -> Self {
        let pair = |z: f64, phi: f64, total: f64| {
            let left = (0.5 * (1.0 + z) * total).max(0.0).sqrt();
            let right = (0.5 * (1.0 - z) * total).max(0.0).sqrt();
            (Complex64::new(left, 0.0), Complex64::from_polar(right, phi))
        };
        let (l_plus, r_plus) = pair(state.z_plus, state.phi_plus, total_plus);
        let (l_minus, r_minus) = pair(state.z_minus, state.phi_minus, total_minus);
        PerMode { l_plus, l_minus, r_plus, r_minus }
    }
}

/// Coupling, interaction and gain/loss parameters of the dimer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Tunnel coupling; sets the energy unit.
    #[serde(rename = "J")]
    pub j: f64,
    /// Self interaction `g_s N / J`.
    pub u_s: f64,
    /// Cross interaction `g_c N / J`.
    pub u_c: f64,
    /// Net gain (positive) or loss (negative) rate per mode.
    pub gamma: PerMode<f64>,
    /// Zero-point energy per mode.
    pub eps: PerMode<f64>,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams { j: 1.0, u_s: 0.0, u_c: 0.0, gamma: PerMode::default(), eps: PerMode::default() }
    }
}

impl ModelParams {
    pub fn new(j: f64, u_s: f64, u_c: f64) -> Self {
        ModelParams { j, u_s, u_c, ..Default::default() }
    }

    /// `J = 1`, balanced gain `gamma` on the left and loss on the right for
    /// both species.
    pub fn pt(u_s: f64, u_c: f64, gamma: f64) -> Self {
        ModelParams::new(1.0, u_s, u_c).with_pt_gamma(gamma)
    }

    pub fn with_pt_gamma(mut self, gamma: f64) -> Self {
        self.gamma = PerMode { l_plus: gamma, l_minus: gamma, r_plus: -gamma, r_minus: -gamma };
        self
    }

    /// Independent left/right rates, shared by both species.
    pub fn with_site_gamma(mut self, gamma_left: f64, gamma_right: f64) -> Self {
        self.gamma = PerMode { l_plus: gamma_left, l_minus: gamma_left, r_plus: gamma_right, r_minus: gamma_right };
        self
    }

    pub fn with_gamma(mut self, gamma: PerMode<f64>) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_eps(mut self, eps: PerMode<f64>) -> Self {
        self.eps = eps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("J", self.j)?;
        ensure_finite("u_s", self.u_s)?;
        ensure_finite("u_c", self.u_c)?;
        for m in Mode::ALL {
            ensure_finite("gamma", self.gamma[m])?;
            ensure_finite("eps", self.eps[m])?;
        }
        if self.j <= 0.0 {
            return Err(Error::InvalidParameter { name: "J", reason: format!("must be > 0, got {}", self.j) });
        }
        Ok(())
    }

    /// Mirror-symmetric energies and antisymmetric gain/loss in both species.
    pub fn pt_symmetric(&self) -> bool {
        [(Mode::LPlus, Mode::RPlus), (Mode::LMinus, Mode::RMinus)].iter().all(|&(l, r)| {
            (self.eps[l] - self.eps[r]).abs() <= PT_TOLERANCE && (self.gamma[l] + self.gamma[r]).abs() <= PT_TOLERANCE
        })
    }

    /// The single balanced rate `gamma = gamma_L = -gamma_R`, shared by both
    /// species, if the parameters have that form.
    pub fn balanced_gamma(&self) -> Result<f64> {
        if self.pt_symmetric() && (self.gamma.l_plus - self.gamma.l_minus).abs() <= PT_TOLERANCE {
            Ok(self.gamma.l_plus)
        } else {
            Err(Error::NotPtBalanced)
        }
    }
}

/// Pump and decay rates of one exciton reservoir.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReservoirChannel {
    /// Exciton creation rate `P`.
    #[serde(rename = "P")]
    pub pump: f64,
    /// Exciton decay rate `Gamma`.
    #[serde(rename = "Gamma")]
    pub decay: f64,
    /// Stimulated scattering coefficient `q`, with `Q(n) = q n`.
    #[serde(rename = "q")]
    pub scattering: f64,
    /// Polariton decay rate `kappa`.
    #[serde(rename = "kappa")]
    pub loss: f64,
}

pub type ReservoirParams = PerMode<ReservoirChannel>;

impl ReservoirChannel {
    /// Chooses the pump so that the weak-depletion gain/loss coefficient
    /// equals `gamma`.
    pub fn tuned_for_gain(gamma: f64, decay: f64, scattering: f64, loss: f64) -> Result<Self> {
        if scattering <= 0.0 {
            return Err(Error::InvalidParameter { name: "q", reason: "must be > 0 to tune the pump".into() });
        }
        let pump = decay * (2.0 * gamma + loss) / scattering;
        if pump < 0.0 {
            return Err(Error::InvalidParameter {
                name: "P",
                reason: format!("gain {gamma} needs a negative pump; raise kappa above {}", -2.0 * gamma),
            });
        }
        let channel = ReservoirChannel { pump, decay, scattering, loss };
        channel.validate()?;
        Ok(channel)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("P", self.pump)?;
        ensure_finite("Gamma", self.decay)?;
        ensure_finite("q", self.scattering)?;
        ensure_finite("kappa", self.loss)?;
        for (name, value) in [("P", self.pump), ("q", self.scattering), ("kappa", self.loss)] {
            if value < 0.0 {
                return Err(Error::InvalidParameter { name, reason: format!("must be >= 0, got {value}") });
            }
        }
        if self.decay <= 0.0 {
            return Err(Error::InvalidParameter { name: "Gamma", reason: format!("must be > 0, got {}", self.decay) });
        }
        Ok(())
    }
}

/// Net polariton gain (+) or loss (-) of an undepleted reservoir:
/// `(q P / Gamma - kappa) / 2`.
pub fn gain_loss_coefficient(res: &ReservoirChannel) -> Result<f64> {
    for (name, value) in [("P", res.pump), ("Gamma", res.decay), ("q", res.scattering), ("kappa", res.loss)] {
        ensure_finite(name, value)?;
    }
    if res.decay <= 0.0 {
        return Err(Error::InvalidParameter { name: "Gamma", reason: format!("must be > 0, got {}", res.decay) });
    }
    Ok(0.5 * (res.scattering * res.pump / res.decay - res.loss))
}

/// Quasi-static exciton population `P / (Gamma + q N)`.
pub fn steady_reservoir_population(res: &ReservoirChannel, population: f64) -> Result<f64> {
    ensure_finite("N", population)?;
    let denominator = res.decay + res.scattering * population;
    if denominator.is_nan() || denominator <= 0.0 {
        return Err(Error::InvalidParameter { name: "Gamma + qN", reason: format!("must be > 0, got {denominator}") });
    }
    Ok(res.pump / denominator)
}

/// Fields plus reservoirs: the state of the full tier.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FullState {
    pub fields: FieldState,
    pub reservoirs: ReservoirState,
}

impl FullState {
    /// Starts every reservoir at its quasi-static population for the given
    /// fields.
    pub fn with_steady_reservoirs(fields: FieldState, rp: &ReservoirParams) -> Result<Self> {
        let mut reservoirs = ReservoirState::default();
        for m in Mode::ALL {
            reservoirs[m] = steady_reservoir_population(&rp[m], fields[m].norm_sqr())?;
        }
        Ok(FullState { fields, reservoirs })
    }
}

/// Population imbalances and phase differences of the two species.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZPhiState {
    pub z_plus: f64,
    pub z_minus: f64,
    #[serde(rename = "Phi_plus")]
    pub phi_plus: f64,
    #[serde(rename = "Phi_minus")]
    pub phi_minus: f64,
}

impl ZPhiState {
    pub fn new(z_plus: f64, z_minus: f64, phi_plus: f64, phi_minus: f64) -> Self {
        ZPhiState { z_plus, z_minus, phi_plus, phi_minus }
    }

    /// Ordering used by the stability analysis: `(z+, z-, Phi+, Phi-)`.
    pub fn to_array(&self) -> [f64; 4] {
        [self.z_plus, self.z_minus, self.phi_plus, self.phi_minus]
    }

    pub fn from_array(v: [f64; 4]) -> Self {
        ZPhiState::new(v[0], v[1], v[2], v[3])
    }

    /// Reads `z` and `Phi` off a field state; `None` when a species is empty.
    pub fn from_fields(fields: &FieldState) -> Option<Self> {
        let obs = observables(fields);
        Some(ZPhiState::new(obs.z_plus?, obs.z_minus?, obs.phi_plus, obs.phi_minus))
    }

    pub fn check_regular(&self) -> Result<()> {
        for z in [self.z_plus, self.z_minus] {
            ensure_finite("z", z)?;
            if z.abs() >= 1.0 {
                return Err(Error::SingularRepresentation { z });
            }
        }
        ensure_finite("Phi", self.phi_plus)?;
        ensure_finite("Phi", self.phi_minus)
    }
}

/// Derivatives of the reduced (gain/loss coefficient) tier.
///
/// `i dpsi/dtau = (eps/J + u_s|psi|^2 + u_c|psi'|^2) psi - psi_other + i (gamma/J) psi`
/// where `psi'` is the other species in the same well and `psi_other` the same
/// species in the other well. Arbitrary per-mode rates are allowed.
pub fn rhs_reduced(fields: &FieldState, mp: &ModelParams) -> FieldState {
    let inv_j = 1.0 / mp.j;
    FieldState::from_fn(|m| {
        let psi = fields[m];
        let shift = mp.eps[m] * inv_j + mp.u_s * psi.norm_sqr() + mp.u_c * fields[m.other_species()].norm_sqr();
        let hamiltonian = psi * shift - fields[m.other_site()];
        Complex64::new(hamiltonian.im, -hamiltonian.re) + psi * (mp.gamma[m] * inv_j)
    })
}

/// Derivatives of the full tier with dynamical reservoirs.
///
/// The gain term is `(q n - kappa)/2` per mode; `mp.gamma` is not used here.
pub fn rhs_full(
    fields: &FieldState,
    reservoirs: &ReservoirState,
    mp: &ModelParams,
    rp: &ReservoirParams,
) -> (FieldState, ReservoirState) {
    let inv_j = 1.0 / mp.j;
    let d_fields = FieldState::from_fn(|m| {
        let psi = fields[m];
        let shift = mp.eps[m] * inv_j + mp.u_s * psi.norm_sqr() + mp.u_c * fields[m.other_species()].norm_sqr();
        let hamiltonian = psi * shift - fields[m.other_site()];
        let gain = 0.5 * (rp[m].scattering * reservoirs[m] - rp[m].loss) * inv_j;
        Complex64::new(hamiltonian.im, -hamiltonian.re) + psi * gain
    });
    let d_reservoirs = ReservoirState::from_fn(|m| {
        let ch = &rp[m];
        let n = reservoirs[m];
        (ch.pump - ch.decay * n - ch.scattering * n * fields[m].norm_sqr()) * inv_j
    });
    (d_fields, d_reservoirs)
}

/// Raw z-Phi derivatives with `gamma` already divided by `J`. Returns NaN
/// outside the representation's domain instead of failing.
pub(crate) fn zphi_derivative(state: &ZPhiState, gamma_over_j: f64, u_s: f64, u_c: f64) -> ZPhiState {
    let species = |z: f64, z_other: f64, phi: f64| {
        let root = (1.0 - z * z).sqrt();
        let z_dot = -2.0 * root * phi.sin() + 2.0 * gamma_over_j;
        let phi_dot = u_s * z + u_c * z_other + 2.0 * z / root * phi.cos();
        (z_dot, phi_dot)
    };
    let (zp, pp) = species(state.z_plus, state.z_minus, state.phi_plus);
    let (zm, pm) = species(state.z_minus, state.z_plus, state.phi_minus);
    ZPhiState::new(zp, zm, pp, pm)
}

/// Derivatives of the z-Phi tier.
///
/// Valid for PT-balanced parameters with a single rate, and exact only while
/// the per-species totals stay at their initial value (near `z = 0` when
/// `gamma != 0`).
pub fn rhs_zphi(state: &ZPhiState, mp: &ModelParams) -> Result<ZPhiState> {
    mp.validate()?;
    let gamma = mp.balanced_gamma()?;
    state.check_regular()?;
    Ok(zphi_derivative(state, gamma / mp.j, mp.u_s, mp.u_c))
}

/// Populations, imbalances and phase differences of a field state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Observables {
    pub populations: PerMode<f64>,
    /// `None` when the (+) species is empty.
    pub z_plus: Option<f64>,
    pub z_minus: Option<f64>,
    pub phi_plus: f64,
    pub phi_minus: f64,
}

pub fn observables(fields: &FieldState) -> Observables {
    let populations = fields.populations();
    let imbalance = |left: f64, right: f64| {
        let total = left + right;
        (total > 0.0).then(|| (left - right) / total)
    };
    Observables {
        populations,
        z_plus: imbalance(populations.l_plus, populations.r_plus),
        z_minus: imbalance(populations.l_minus, populations.r_minus),
        phi_plus: phase_difference(fields.l_plus, fields.r_plus),
        phi_minus: phase_difference(fields.l_minus, fields.r_minus),
    }
}

/// `arg psi_right - arg psi_left`, wrapped to (-pi, pi].
pub fn phase_difference(left: Complex64, right: Complex64) -> f64 {
    let phi = (right * left.conj()).arg();
    if phi <= -PI {
        phi + 2.0 * PI
    } else {
        phi
    }
}

/// Wraps an angle to (-pi, pi].
pub fn wrap_phase(phi: f64) -> f64 {
    let r = phi.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}
