//! JSON scenario and sweep files. Every physical rate or energy is given in
//! units of `J` (keys ending in `_over_J`); times are in units of `1/J`
//! (keys ending in `_tau`).

use std::path::Path;

use num_complex::Complex64;
use polsim_core::gate::{BasisLabel, Target, DEFAULT_BASIS_AMPLITUDE};
use polsim_core::integrator::{IntegratorConfig, Method, DEFAULT_BLOWUP_THRESHOLD};
use polsim_core::model::{FieldState, ModelParams, PerMode, ReservoirChannel, ReservoirParams, ZPhiState};
use polsim_core::presets;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

fn field_error(field: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {reason}"))
}

fn check_finite(field: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(field_error(field, format!("must be finite, got {v}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Full,
    Reduced,
    Zphi,
}

/// Gain (positive) or loss (negative) rates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum GainSpec {
    /// `+gamma` on the left well and `-gamma` on the right, both species.
    Balanced {
        balanced: f64,
    },
    /// Per-well rates shared by both species.
    Sites {
        left: f64,
        right: f64,
    },
    Modes(PerMode<f64>),
}

impl Default for GainSpec {
    fn default() -> Self {
        GainSpec::Balanced { balanced: 0.0 }
    }
}

impl GainSpec {
    pub fn per_mode(&self) -> PerMode<f64> {
        match *self {
            GainSpec::Balanced { balanced } => PerMode::from_fn(|m| if m.is_left() { balanced } else { -balanced }),
            GainSpec::Sites { left, right } => PerMode::from_fn(|m| if m.is_left() { left } else { right }),
            GainSpec::Modes(p) => p,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(rename = "gsN_over_J")]
    pub gs_n_over_j: f64,
    #[serde(rename = "gcN_over_J")]
    pub gc_n_over_j: f64,
    #[serde(rename = "gamma_over_J", default)]
    pub gamma_over_j: GainSpec,
    #[serde(rename = "eps_over_J", default, skip_serializing_if = "Option::is_none")]
    pub eps_over_j: Option<PerMode<f64>>,
}

impl ModelSpec {
    pub fn params(&self) -> Result<ModelParams, CliError> {
        check_finite("model.gsN_over_J", self.gs_n_over_j)?;
        check_finite("model.gcN_over_J", self.gc_n_over_j)?;
        for (m, v) in self.gamma_over_j.per_mode().iter() {
            check_finite(&format!("model.gamma_over_J.{}", m.name()), *v)?;
        }
        let mut mp = ModelParams::new(1.0, self.gs_n_over_j, self.gc_n_over_j).with_gamma(self.gamma_over_j.per_mode());
        if let Some(eps) = self.eps_over_j {
            for (m, v) in eps.iter() {
                check_finite(&format!("model.eps_over_J.{}", m.name()), *v)?;
            }
            mp = mp.with_eps(eps);
        }
        Ok(mp)
    }
}

/// Exciton reservoir rates shared by all four modes. Pumps are either given
/// per mode or tuned so that each mode's net rate hits a target.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReservoirSpec {
    #[serde(rename = "decay_over_J")]
    pub decay_over_j: f64,
    #[serde(rename = "scattering_over_J")]
    pub scattering_over_j: f64,
    #[serde(rename = "loss_over_J")]
    pub loss_over_j: f64,
    #[serde(rename = "pump_over_J", default, skip_serializing_if = "Option::is_none")]
    pub pump_over_j: Option<PerMode<f64>>,
    #[serde(rename = "target_gamma_over_J", default, skip_serializing_if = "Option::is_none")]
    pub target_gamma_over_j: Option<GainSpec>,
}

impl ReservoirSpec {
    pub fn params(&self) -> Result<ReservoirParams, CliError> {
        check_finite("reservoir.decay_over_J", self.decay_over_j)?;
        check_finite("reservoir.scattering_over_J", self.scattering_over_j)?;
        check_finite("reservoir.loss_over_J", self.loss_over_j)?;
        let mut channels = Vec::with_capacity(4);
        for m in polsim_core::Mode::ALL {
            let channel = match (self.pump_over_j, self.target_gamma_over_j) {
                (None, Some(target)) => {
                    let g = target.per_mode()[m];
                    check_finite(&format!("reservoir.target_gamma_over_J.{}", m.name()), g)?;
                    ReservoirChannel::tuned_for_gain(g, self.decay_over_j, self.scattering_over_j, self.loss_over_j)
                        .map_err(|e| field_error(&format!("reservoir.target_gamma_over_J.{}", m.name()), e))?
                }
                (Some(pump), None) => ReservoirChannel {
                    pump: pump[m],
                    decay: self.decay_over_j,
                    scattering: self.scattering_over_j,
                    loss: self.loss_over_j,
                },
                _ => return Err(field_error("reservoir", "give exactly one of pump_over_J and target_gamma_over_J")),
            };
            channel.validate().map_err(|e| field_error(&format!("reservoir.{}", m.name()), e))?;
            channels.push(channel);
        }
        Ok(PerMode::from_fn(|m| channels[m as usize]))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    PlusLeftMinusRight,
    Dd,
    Du,
    Ud,
    Uu,
}

impl Preset {
    fn fields(self, amplitude: f64) -> FieldState {
        let basis = |l| polsim_core::gate::basis_initial_state(l, amplitude);
        match self {
            Preset::PlusLeftMinusRight => presets::plus_left_minus_right(amplitude),
            Preset::Dd => basis(BasisLabel::Dd),
            Preset::Du => basis(BasisLabel::Du),
            Preset::Ud => basis(BasisLabel::Ud),
            Preset::Uu => basis(BasisLabel::Uu),
        }
    }
}

fn default_amplitude() -> f64 {
    DEFAULT_BASIS_AMPLITUDE
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum InitialSpec {
    Preset {
        preset: Preset,
        /// Amplitude of each occupied mode, in units of `sqrt(N)`.
        #[serde(default = "default_amplitude")]
        amplitude: f64,
    },
    /// `[re, im]` per mode.
    Amplitudes {
        amplitudes: PerMode<[f64; 2]>,
    },
    Zphi {
        zphi: ZPhiState,
    },
}

impl InitialSpec {
    pub fn fields(&self) -> Result<FieldState, CliError> {
        let f = match *self {
            InitialSpec::Preset { preset, amplitude } => {
                check_finite("initial.amplitude", amplitude)?;
                preset.fields(amplitude)
            }
            InitialSpec::Amplitudes { amplitudes } => amplitudes.map(|&[re, im]| Complex64::new(re, im)),
            InitialSpec::Zphi { zphi } => {
                zphi.check_regular().map_err(|e| field_error("initial.zphi", e))?;
                FieldState::from_zphi(&zphi, 0.5, 0.5)
            }
        };
        if !f.is_finite() {
            return Err(field_error("initial", "amplitudes must be finite"));
        }
        Ok(f)
    }

    pub fn zphi(&self) -> Result<ZPhiState, CliError> {
        let state = match *self {
            InitialSpec::Zphi { zphi } => zphi,
            _ => ZPhiState::from_fields(&self.fields()?)
                .ok_or_else(|| field_error("initial", "imbalance undefined for an empty species"))?,
        };
        for (name, v) in [
            ("z_plus", state.z_plus),
            ("z_minus", state.z_minus),
            ("Phi_plus", state.phi_plus),
            ("Phi_minus", state.phi_minus),
        ] {
            check_finite(&format!("initial.zphi.{name}"), v)?;
        }
        state.check_regular().map_err(|e| field_error("initial.zphi", e))?;
        Ok(state)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodName {
    Rk45,
    Rk4,
}

fn default_method() -> MethodName {
    MethodName::Rk45
}

fn default_blowup() -> f64 {
    DEFAULT_BLOWUP_THRESHOLD
}

/// Stepper settings. `rtol`/`atol` apply to rk45 (defaults 1e-10/1e-12);
/// `dt_tau` is required for rk4.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodSpec {
    #[serde(default = "default_method")]
    pub method: MethodName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rtol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_tau: Option<f64>,
}

impl Default for MethodSpec {
    fn default() -> Self {
        MethodSpec { method: MethodName::Rk45, rtol: None, atol: None, dt_tau: None }
    }
}

impl MethodSpec {
    fn method(&self, field: &str) -> Result<Method, CliError> {
        match self.method {
            MethodName::Rk45 => {
                if self.dt_tau.is_some() {
                    return Err(field_error(&format!("{field}.dt_tau"), "only used by method \"rk4\""));
                }
                Ok(Method::Rk45 { rtol: self.rtol.unwrap_or(1e-10), atol: self.atol.unwrap_or(1e-12) })
            }
            MethodName::Rk4 => {
                if self.rtol.is_some() || self.atol.is_some() {
                    return Err(field_error(field, "rtol/atol are only used by method \"rk45\""));
                }
                let dt = self
                    .dt_tau
                    .ok_or_else(|| field_error(&format!("{field}.dt_tau"), "required for method \"rk4\""))?;
                Ok(Method::Rk4 { dt })
            }
        }
    }

    /// Config carrying only the stepper settings; callers override the times.
    pub fn config(&self, field: &str) -> Result<IntegratorConfig, CliError> {
        let cfg = IntegratorConfig {
            method: self.method(field)?,
            t_end: 1.0,
            sample_every: 1.0,
            blowup_threshold: DEFAULT_BLOWUP_THRESHOLD,
        };
        cfg.validate().map_err(|e| field_error(field, e))?;
        Ok(cfg)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSpec {
    #[serde(default = "default_method")]
    pub method: MethodName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rtol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_tau: Option<f64>,
    pub tau_end: f64,
    pub sample_every_tau: f64,
    #[serde(default = "default_blowup")]
    pub blowup_threshold: f64,
}

impl IntegratorSpec {
    pub fn config(&self) -> Result<IntegratorConfig, CliError> {
        let stepper = MethodSpec { method: self.method, rtol: self.rtol, atol: self.atol, dt_tau: self.dt_tau };
        let cfg = IntegratorConfig {
            method: stepper.method("integrator")?,
            t_end: self.tau_end,
            sample_every: self.sample_every_tau,
            blowup_threshold: self.blowup_threshold,
        };
        cfg.validate().map_err(|e| field_error("integrator", e))?;
        Ok(cfg)
    }
}

/// Inclusive linear range, or explicit values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum RangeSpec {
    Linear { start: f64, stop: f64, points: usize },
    Values(Vec<f64>),
}

impl RangeSpec {
    pub fn values(&self, field: &str) -> Result<Vec<f64>, CliError> {
        let v = match self {
            RangeSpec::Linear { start, stop, points } => {
                check_finite(&format!("{field}.start"), *start)?;
                check_finite(&format!("{field}.stop"), *stop)?;
                match points {
                    0 => Vec::new(),
                    1 => vec![*start],
                    n => {
                        let step = (stop - start) / (n - 1) as f64;
                        let mut v: Vec<f64> = (0..*n).map(|k| start + k as f64 * step).collect();
                        v[n - 1] = *stop;
                        v
                    }
                }
            }
            RangeSpec::Values(v) => v.clone(),
        };
        for x in &v {
            check_finite(field, *x)?;
        }
        Ok(v)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityOutput {
    /// Balanced rates to scan; the scenario's own rate when absent.
    #[serde(rename = "gamma_over_J", default, skip_serializing_if = "Option::is_none")]
    pub gamma_over_j: Option<RangeSpec>,
}

fn default_gate_sample() -> f64 {
    0.01
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateOutput {
    pub tau_end: f64,
    #[serde(default = "default_gate_sample")]
    pub sample_every_tau: f64,
    #[serde(default = "default_amplitude")]
    pub basis_amplitude: f64,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "yes")]
    pub trajectory: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stability: Option<StabilityOutput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gate: Option<GateOutput>,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { trajectory: true, stability: None, gate: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub tier: Tier,
    pub model: ModelSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reservoir: Option<ReservoirSpec>,
    pub initial: InitialSpec,
    pub integrator: IntegratorSpec,
    #[serde(default)]
    pub outputs: OutputSpec,
}

/// Scenario with every block checked and converted to library types.
#[derive(Debug)]
pub struct ValidScenario {
    pub tier: Tier,
    pub params: ModelParams,
    pub reservoirs: Option<ReservoirParams>,
    pub fields: Option<FieldState>,
    pub zphi: Option<ZPhiState>,
    pub integrator: IntegratorConfig,
    pub stability_grid: Option<Vec<f64>>,
    pub gate: Option<GateOutput>,
    pub trajectory: bool,
}

fn check_schema(version: u32) -> Result<(), CliError> {
    if version != SCHEMA_VERSION {
        return Err(field_error("schema_version", format!("unsupported version {version}, expected {SCHEMA_VERSION}")));
    }
    Ok(())
}

fn require_pt(params: &ModelParams, why: &str) -> Result<f64, CliError> {
    params.balanced_gamma().map_err(|_| {
        field_error("model.gamma_over_J", format!("{why} needs balanced gain/loss shared by both species"))
    })
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<ValidScenario, CliError> {
        check_schema(self.schema_version)?;
        let params = self.model.params()?;
        let reservoirs = match (self.tier, &self.reservoir) {
            (Tier::Full, Some(r)) => Some(r.params()?),
            (Tier::Full, None) => return Err(field_error("reservoir", "required for tier \"full\"")),
            (_, Some(_)) => return Err(field_error("reservoir", "only allowed for tier \"full\"")),
            (_, None) => None,
        };
        let (fields, zphi) = match self.tier {
            Tier::Zphi => {
                require_pt(&params, "tier \"zphi\"")?;
                (None, Some(self.initial.zphi()?))
            }
            _ => (Some(self.initial.fields()?), None),
        };
        let integrator = self.integrator.config()?;
        let stability_grid = match &self.outputs.stability {
            Some(s) => {
                let own = require_pt(&params, "outputs.stability")?;
                Some(match &s.gamma_over_j {
                    Some(range) => range.values("outputs.stability.gamma_over_J")?,
                    None => vec![own],
                })
            }
            None => None,
        };
        if let Some(g) = &self.outputs.gate {
            check_finite("outputs.gate.tau_end", g.tau_end)?;
            if g.tau_end < 0.0 {
                return Err(field_error("outputs.gate.tau_end", "must be >= 0"));
            }
            if !(g.sample_every_tau.is_finite() && g.sample_every_tau > 0.0) {
                return Err(field_error("outputs.gate.sample_every_tau", "must be > 0"));
            }
            if !(g.basis_amplitude.is_finite() && g.basis_amplitude > 0.0) {
                return Err(field_error("outputs.gate.basis_amplitude", "must be > 0"));
            }
        }
        Ok(ValidScenario {
            tier: self.tier,
            params,
            reservoirs,
            fields,
            zphi,
            integrator,
            stability_grid,
            gate: self.outputs.gate,
            trajectory: self.outputs.trajectory,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    Stability,
    Fidelity,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GateTime {
    Fixed(f64),
    /// `"optimal"`: the stretched swap time for each row's rate.
    Named(NamedTime),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NamedTime {
    Optimal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FidelitySpec {
    #[serde(rename = "t_tau")]
    pub t: GateTime,
    #[serde(default = "default_target")]
    pub target: Target,
    #[serde(default = "default_amplitude")]
    pub basis_amplitude: f64,
    #[serde(default)]
    pub integrator: MethodSpec,
}

fn default_target() -> Target {
    Target::Swap
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axes {
    #[serde(rename = "gsN_over_J")]
    pub gs_n_over_j: RangeSpec,
    #[serde(rename = "gcN_over_J")]
    pub gc_n_over_j: RangeSpec,
    #[serde(rename = "gamma_over_J")]
    pub gamma_over_j: RangeSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub schema_version: u32,
    pub kind: SweepKind,
    /// Balanced-gain grid; each row is a PT-symmetric parameter set.
    pub axes: Axes,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<FidelitySpec>,
}

#[derive(Debug)]
pub struct ValidSweep {
    pub kind: SweepKind,
    pub gs: Vec<f64>,
    pub gc: Vec<f64>,
    pub gamma: Vec<f64>,
    pub fidelity: Option<FidelitySpec>,
}

impl SweepConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<ValidSweep, CliError> {
        check_schema(self.schema_version)?;
        let fidelity = match (self.kind, self.fidelity) {
            (SweepKind::Fidelity, None) => return Err(field_error("fidelity", "required for kind \"fidelity\"")),
            (SweepKind::Stability, Some(_)) => {
                return Err(field_error("fidelity", "only allowed for kind \"fidelity\""))
            }
            (_, f) => f,
        };
        if let Some(f) = &fidelity {
            if let GateTime::Fixed(t) = f.t {
                if !t.is_finite() || t < 0.0 {
                    return Err(field_error("fidelity.t_tau", "must be finite and >= 0"));
                }
            }
            if f.target == Target::Custom {
                return Err(field_error("fidelity.target", "must be \"swap\" or \"iswap\""));
            }
            if !(f.basis_amplitude.is_finite() && f.basis_amplitude > 0.0) {
                return Err(field_error("fidelity.basis_amplitude", "must be > 0"));
            }
            f.integrator.config("fidelity.integrator")?;
        }
        Ok(ValidSweep {
            kind: self.kind,
            gs: self.axes.gs_n_over_j.values("axes.gsN_over_J")?,
            gc: self.axes.gc_n_over_j.values("axes.gcN_over_J")?,
            gamma: self.axes.gamma_over_j.values("axes.gamma_over_J")?,
            fidelity,
        })
    }
}
