//! Two-qubit reading of the four-mode state and the effective SWAP gate.
//!
//! The (+) species in a well is the amplitude of that qubit's `|up>` state and
//! the (-) species the amplitude of `|down>`. The left well is the first
//! qubit. Basis order throughout is `(dd, du, ud, uu)`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::evolve::evolve_reduced;
use crate::integrator::IntegratorConfig;
use crate::linear::propagator;
use crate::model::{FieldState, ModelParams};

/// Amplitude given to each occupied mode of a basis input. With two occupied
/// modes this puts a total population of `N` in the system.
pub const DEFAULT_BASIS_AMPLITUDE: f64 = FRAC_1_SQRT_2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisLabel {
    Dd,
    Du,
    Ud,
    Uu,
}

impl BasisLabel {
    pub const ALL: [BasisLabel; 4] = [BasisLabel::Dd, BasisLabel::Du, BasisLabel::Ud, BasisLabel::Uu];

    pub fn as_str(self) -> &'static str {
        match self {
            BasisLabel::Dd => "dd",
            BasisLabel::Du => "du",
            BasisLabel::Ud => "ud",
            BasisLabel::Uu => "uu",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Spin of the (left, right) qubit, `true` for up.
    pub fn spins(self) -> (bool, bool) {
        match self {
            BasisLabel::Dd => (false, false),
            BasisLabel::Du => (false, true),
            BasisLabel::Ud => (true, false),
            BasisLabel::Uu => (true, true),
        }
    }
}

impl std::str::FromStr for BasisLabel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        BasisLabel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| format!("unknown basis label `{s}` (expected dd, du, ud or uu)"))
    }
}

/// Per-well normalized amplitudes `c_s^+-`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitAmplitudes {
    pub left_up: Complex64,
    pub left_down: Complex64,
    pub right_up: Complex64,
    pub right_down: Complex64,
}

pub fn amplitudes_from_fields(fields: &FieldState) -> Result<QubitAmplitudes> {
    let left = (fields.l_plus.norm_sqr() + fields.l_minus.norm_sqr()).sqrt();
    let right = (fields.r_plus.norm_sqr() + fields.r_minus.norm_sqr()).sqrt();
    ensure_finite("left well population", left)?;
    ensure_finite("right well population", right)?;
    if left == 0.0 {
        return Err(Error::EmptyWell { site: "left" });
    }
    if right == 0.0 {
        return Err(Error::EmptyWell { site: "right" });
    }
    Ok(QubitAmplitudes {
        left_up: fields.l_plus / left,
        left_down: fields.l_minus / left,
        right_up: fields.r_plus / right,
        right_down: fields.r_minus / right,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct TwoQubitAmplitudes {
    pub dd: Complex64,
    pub du: Complex64,
    pub ud: Complex64,
    pub uu: Complex64,
}

impl TwoQubitAmplitudes {
    pub fn to_vector(&self) -> Vector4<Complex64> {
        Vector4::new(self.dd, self.du, self.ud, self.uu)
    }

    pub fn from_vector(v: &Vector4<Complex64>) -> Self {
        TwoQubitAmplitudes { dd: v[0], du: v[1], ud: v[2], uu: v[3] }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.to_vector().norm_squared()
    }
}

/// Product-state amplitudes `C_{sigma sigma'} = c_L^sigma c_R^sigma'`.
pub fn two_qubit_state(fields: &FieldState) -> Result<TwoQubitAmplitudes> {
    let c = amplitudes_from_fields(fields)?;
    Ok(TwoQubitAmplitudes {
        dd: c.left_down * c.right_down,
        du: c.left_down * c.right_up,
        ud: c.left_up * c.right_down,
        uu: c.left_up * c.right_up,
    })
}

/// One occupied mode per well, in the species matching that qubit's spin.
pub fn basis_initial_state(label: BasisLabel, amplitude: f64) -> FieldState {
    let (left_up, right_up) = label.spins();
    let a = Complex64::new(amplitude, 0.0);
    let mut fields = FieldState::default();
    if left_up {
        fields.l_plus = a;
    } else {
        fields.l_minus = a;
    }
    if right_up {
        fields.r_plus = a;
    } else {
        fields.r_minus = a;
    }
    fields
}

/// Effective transformation; column `i` is the output for basis input `i`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GateMatrix(pub Matrix4<Complex64>);

impl GateMatrix {
    pub fn identity() -> Self {
        GateMatrix(Matrix4::identity())
    }

    pub fn from_columns(columns: [TwoQubitAmplitudes; 4]) -> Self {
        GateMatrix(Matrix4::from_columns(&columns.map(|c| c.to_vector())))
    }

    pub fn column(&self, input: BasisLabel) -> TwoQubitAmplitudes {
        TwoQubitAmplitudes::from_vector(&self.0.column(input.index()).into())
    }

    pub fn entry(&self, output: BasisLabel, input: BasisLabel) -> Complex64 {
        self.0[(output.index(), input.index())]
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        GateMatrix(self.0 * factor)
    }

    pub fn max_abs_diff(&self, other: &GateMatrix) -> f64 {
        (self.0 - other.0).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// SWAP without the overall sign picked up by the Hermitian dimer.
pub fn target_swap() -> GateMatrix {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    GateMatrix(Matrix4::new(
        one, zero, zero, zero, //
        zero, zero, one, zero, //
        zero, one, zero, zero, //
        zero, zero, zero, one,
    ))
}

pub fn target_iswap() -> GateMatrix {
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::i();
    let zero = Complex64::new(0.0, 0.0);
    GateMatrix(Matrix4::new(
        one, zero, zero, zero, //
        zero, zero, i, zero, //
        zero, i, zero, zero, //
        zero, zero, zero, one,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Swap,
    Iswap,
    Custom,
}

impl Target {
    /// Matrix for the named targets; `None` for `Custom`.
    pub fn matrix(self) -> Option<GateMatrix> {
        match self {
            Target::Swap => Some(target_swap()),
            Target::Iswap => Some(target_iswap()),
            Target::Custom => None,
        }
    }
}

/// Average gate fidelity `[Tr(M M^dag) + |Tr M|^2] / (n (n + 1))` with
/// `M = U0^dag U`.
pub fn gate_fidelity(u: &GateMatrix, target: &GateMatrix) -> f64 {
    let m = target.0.adjoint() * u.0;
    let n = 4.0;
    let frobenius = (m * m.adjoint()).trace().re;
    (frobenius + m.trace().norm_sqr()) / (n * (n + 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FidelityReport {
    pub fidelity: f64,
    /// Gate time in units of `1/J`.
    pub t: f64,
    pub target: Target,
}

pub fn score(u: &GateMatrix, target: Target, custom: Option<&GateMatrix>, t: f64) -> FidelityReport {
    let reference = target.matrix().or(custom.copied()).unwrap_or_else(GateMatrix::identity);
    FidelityReport { fidelity: gate_fidelity(u, &reference), t, target }
}

/// Hermitian, non-interacting transformation at time `t`.
pub fn table1_reference(j: f64, t: f64) -> GateMatrix {
    let (s, c) = (j * t).sin_cos();
    let corner = Complex64::from_polar(1.0, 2.0 * j * t);
    let mix = Complex64::new(0.0, s * c);
    let zero = Complex64::new(0.0, 0.0);
    let c2 = Complex64::new(c * c, 0.0);
    let s2 = Complex64::new(-s * s, 0.0);
    GateMatrix(Matrix4::new(
        corner, mix, mix, zero, //
        zero, c2, s2, zero, //
        zero, s2, c2, zero, //
        zero, mix, mix, corner,
    ))
}

/// Exchange-Hamiltonian evolution `H = -J sigma_L^+ sigma_R^- + h.c.` of a
/// basis input.
pub fn xy_spin_evolution(j: f64, t: f64, input: BasisLabel) -> TwoQubitAmplitudes {
    let (s, c) = (j * t).sin_cos();
    let stay = Complex64::new(c, 0.0);
    let hop = Complex64::new(0.0, s);
    let mut out = TwoQubitAmplitudes::default();
    match input {
        BasisLabel::Dd => out.dd = Complex64::new(1.0, 0.0),
        BasisLabel::Uu => out.uu = Complex64::new(1.0, 0.0),
        BasisLabel::Du => {
            out.du = stay;
            out.ud = hop;
        }
        BasisLabel::Ud => {
            out.ud = stay;
            out.du = hop;
        }
    }
    out
}

pub fn xy_gate(j: f64, t: f64) -> GateMatrix {
    GateMatrix::from_columns(BasisLabel::ALL.map(|l| xy_spin_evolution(j, t, l)))
}

/// Swap time stretched for the reduced Rabi frequency,
/// `pi / ((2 - gamma^2 / J^2) J)`.
pub fn optimal_swap_time(j: f64, gamma: f64) -> Result<f64> {
    ensure_finite("J", j)?;
    ensure_finite("gamma", gamma)?;
    if j <= 0.0 {
        return Err(Error::InvalidParameter { name: "J", reason: format!("must be > 0, got {j}") });
    }
    let ratio = gamma * gamma / (j * j);
    if ratio >= 2.0 {
        return Err(Error::InvalidParameter { name: "gamma", reason: "requires gamma^2 < 2 J^2".into() });
    }
    Ok(PI / ((2.0 - ratio) * j))
}

fn check_time(t: f64) -> Result<()> {
    ensure_finite("t", t)?;
    if t < 0.0 {
        return Err(Error::InvalidParameter { name: "t", reason: format!("must be >= 0, got {t}") });
    }
    Ok(())
}

/// Gate from evolving each basis input under the reduced tier for time `t`
/// (units of `1/J`), with [`DEFAULT_BASIS_AMPLITUDE`].
pub fn gate_matrix(mp: &ModelParams, t: f64, cfg: &IntegratorConfig) -> Result<GateMatrix> {
    gate_matrix_with_amplitude(mp, t, cfg, DEFAULT_BASIS_AMPLITUDE)
}

pub fn gate_matrix_with_amplitude(
    mp: &ModelParams,
    t: f64,
    cfg: &IntegratorConfig,
    amplitude: f64,
) -> Result<GateMatrix> {
    check_time(t)?;
    let series = gate_time_series(mp, t, t.max(f64::MIN_POSITIVE), cfg, amplitude)?;
    Ok(series.last().expect("series holds at least t = 0").1)
}

/// Gate matrices sampled every `sample_every` from 0 to `t_end` (both in
/// units of `1/J`). `cfg` supplies the method, tolerances and blow-up
/// threshold; its time fields are overridden.
pub fn gate_time_series(
    mp: &ModelParams,
    t_end: f64,
    sample_every: f64,
    cfg: &IntegratorConfig,
    amplitude: f64,
) -> Result<Vec<(f64, GateMatrix)>> {
    mp.validate()?;
    check_time(t_end)?;
    ensure_finite("basis amplitude", amplitude)?;
    if amplitude <= 0.0 {
        return Err(Error::InvalidParameter { name: "basis amplitude", reason: "must be > 0".into() });
    }
    if t_end == 0.0 {
        return Ok(vec![(0.0, GateMatrix::identity())]);
    }
    let tau_end = t_end * mp.j;
    let mut run_cfg = *cfg;
    run_cfg.t_end = tau_end;
    run_cfg.sample_every = (sample_every * mp.j).min(tau_end);

    let columns = BasisLabel::ALL
        .par_iter()
        .map(|&label| {
            let traj = evolve_reduced(mp, &basis_initial_state(label, amplitude), &run_cfg)?;
            if let Some(tau) = traj.diverged_at {
                return Err(Error::BrokenPhase { column: label.as_str(), tau });
            }
            let amps = traj
                .states
                .iter()
                .map(two_qubit_state)
                .collect::<Result<Vec<_>>>()
                .map_err(|_| Error::BrokenPhase { column: label.as_str(), tau: f64::NAN })?;
            Ok((traj.times, amps))
        })
        .collect::<Result<Vec<_>>>()?;

    let times = &columns[0].0;
    Ok(times
        .iter()
        .enumerate()
        .map(|(k, &tau)| {
            let gate = GateMatrix::from_columns([0, 1, 2, 3].map(|c| columns[c].1[k]));
            (tau / mp.j, gate)
        })
        .collect())
}

/// Non-interacting PT gate from the closed-form propagator.
pub fn linear_gate_matrix(j: f64, gamma: f64, t: f64) -> Result<GateMatrix> {
    let u = propagator(j, gamma, t)?;
    let mut columns = [TwoQubitAmplitudes::default(); 4];
    for label in BasisLabel::ALL {
        let input = basis_initial_state(label, 1.0);
        let (l_plus, r_plus) = u.apply(input.l_plus, input.r_plus);
        let (l_minus, r_minus) = u.apply(input.l_minus, input.r_minus);
        columns[label.index()] = two_qubit_state(&FieldState { l_plus, l_minus, r_plus, r_minus })?;
    }
    Ok(GateMatrix::from_columns(columns))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn amplitudes_examples() {
        let f = FieldState { l_plus: c(2.0, 0.0), r_minus: c(3.0, 0.0), ..Default::default() };
        let a = amplitudes_from_fields(&f).unwrap();
        assert_eq!(
            (a.left_up, a.left_down, a.right_up, a.right_down),
            (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0))
        );

        let f = FieldState { l_plus: c(1.0, 0.0), l_minus: c(1.0, 0.0), r_plus: c(0.0, 1.0), ..Default::default() };
        let a = amplitudes_from_fields(&f).unwrap();
        assert_abs_diff_eq!(a.left_up.re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(a.left_down.re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_eq!(a.right_up, c(0.0, 1.0));

        let f = FieldState { l_plus: c(1.0, 0.0), ..Default::default() };
        assert_eq!(amplitudes_from_fields(&f), Err(Error::EmptyWell { site: "right" }));
    }

    #[test]
    fn product_amplitudes() {
        let f = FieldState { l_minus: c(1.0, 0.0), r_plus: c(1.0, 0.0), ..Default::default() };
        let s = two_qubit_state(&f).unwrap();
        assert_eq!(s.du, c(1.0, 0.0));
        assert_eq!(s.dd + s.ud + s.uu, c(0.0, 0.0));
    }

    #[test]
    fn basis_states() {
        let a = DEFAULT_BASIS_AMPLITUDE;
        let ud = basis_initial_state(BasisLabel::Ud, a);
        assert_eq!((ud.l_plus.re, ud.r_minus.re, ud.l_minus.re, ud.r_plus.re), (a, a, 0.0, 0.0));
        let dd = basis_initial_state(BasisLabel::Dd, 1.0);
        assert_eq!((dd.l_minus.re, dd.r_minus.re, dd.total_population()), (1.0, 1.0, 2.0));
        let uu = basis_initial_state(BasisLabel::Uu, 1.0);
        assert_eq!((uu.l_plus.re, uu.r_plus.re, uu.total_population()), (1.0, 1.0, 2.0));
        for label in BasisLabel::ALL {
            let s = two_qubit_state(&basis_initial_state(label, 0.3)).unwrap();
            assert_eq!(s.to_vector(), Vector4::from_fn(|i, _| c(if i == label.index() { 1.0 } else { 0.0 }, 0.0)));
            assert_eq!(label.as_str().parse::<BasisLabel>().unwrap(), label);
        }
        assert!("xx".parse::<BasisLabel>().is_err());
    }

    #[test]
    fn swap_and_iswap() {
        let swap = target_swap();
        assert_eq!(swap.0 * swap.0, Matrix4::identity());
        let iswap = target_iswap();
        assert_eq!(iswap.column(BasisLabel::Dd).dd, c(1.0, 0.0));
        assert_eq!(iswap.column(BasisLabel::Du).ud, c(0.0, 1.0));
        assert_eq!(iswap.column(BasisLabel::Ud).du, c(0.0, 1.0));
        assert_eq!(iswap.column(BasisLabel::Uu).uu, c(1.0, 0.0));
        assert_eq!(gate_fidelity(&swap, &swap), 1.0);
    }

    #[test]
    fn fidelity_examples() {
        let swap = target_swap();
        let iswap = target_iswap();
        assert_abs_diff_eq!(gate_fidelity(&iswap, &iswap), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(gate_fidelity(&swap, &iswap), 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(gate_fidelity(&iswap, &swap), 0.6, epsilon = 1e-15);
        let m = iswap.0.adjoint() * swap.0;
        assert_eq!(m, Matrix4::from_diagonal(&Vector4::new(c(1.0, 0.0), c(0.0, -1.0), c(0.0, -1.0), c(1.0, 0.0))));
        assert_abs_diff_eq!(gate_fidelity(&swap.scaled(c(-1.0, 0.0)), &swap), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn table1_examples() {
        assert!(table1_reference(1.0, 0.0).max_abs_diff(&GateMatrix::identity()) < 1e-15);
        let at_half = table1_reference(1.0, PI / 2.0);
        assert!(at_half.max_abs_diff(&target_swap().scaled(c(-1.0, 0.0))) < 1e-15);
        let quarter = table1_reference(1.0, PI / 4.0);
        assert_abs_diff_eq!(quarter.entry(BasisLabel::Du, BasisLabel::Du).re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(quarter.entry(BasisLabel::Dd, BasisLabel::Du).im, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn linear_gate_matches_table() {
        for t in [0.0, 0.3, 1.1, PI / 2.0, 2.9] {
            let g = linear_gate_matrix(1.0, 0.0, t).unwrap();
            assert!(g.max_abs_diff(&table1_reference(1.0, t)) < 1e-14, "t = {t}");
        }
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn xy_examples() {
        let out = xy_spin_evolution(1.0, PI / 2.0, BasisLabel::Du);
        assert_abs_diff_eq!((out.ud - c(0.0, 1.0)).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(out.du.norm(), 0.0, epsilon = 1e-15);
        assert!(xy_gate(1.0, 0.0).max_abs_diff(&GateMatrix::identity()) < 1e-15);
        let out = xy_spin_evolution(1.0, PI / 4.0, BasisLabel::Ud);
        assert_abs_diff_eq!(out.ud.re, 0.70711, epsilon = 1e-5);
        assert_abs_diff_eq!(out.du.im, 0.70711, epsilon = 1e-5);
        assert!(xy_gate(1.0, PI / 2.0).max_abs_diff(&target_iswap()) < 1e-15);
    }

    #[test]
    fn optimal_time_examples() {
        assert_abs_diff_eq!(optimal_swap_time(1.0, 0.0).unwrap(), PI / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(optimal_swap_time(1.0, 0.3).unwrap(), PI / 1.91, epsilon = 1e-15);
        assert_abs_diff_eq!(optimal_swap_time(1.0, 0.1).unwrap(), PI / 1.99, epsilon = 1e-15);
        assert_abs_diff_eq!(optimal_swap_time(2.0, 0.6).unwrap(), PI / (1.91 * 2.0), epsilon = 1e-15);
        assert!(optimal_swap_time(1.0, 1.5).is_err());
    }

    #[test]
    fn gate_at_zero_time_is_identity() {
        let g = gate_matrix(&ModelParams::pt(1.0, 0.5, 0.1), 0.0, &IntegratorConfig::rk45(1.0, 1.0)).unwrap();
        assert_eq!(g, GateMatrix::identity());
        assert!(gate_matrix(&ModelParams::default(), -1.0, &IntegratorConfig::rk45(1.0, 1.0)).is_err());
    }

    #[test]
    fn hermitian_gate_is_minus_swap() {
        let g = gate_matrix(&ModelParams::default(), PI / 2.0, &IntegratorConfig::rk45(1.0, 1.0)).unwrap();
        assert!(g.max_abs_diff(&target_swap().scaled(c(-1.0, 0.0))) < 1e-8);
        let g = gate_matrix(&ModelParams::default(), PI / 4.0, &IntegratorConfig::rk45(1.0, 1.0)).unwrap();
        assert_abs_diff_eq!(g.entry(BasisLabel::Du, BasisLabel::Du).re, 0.5, epsilon = 1e-8);
    }

    #[test]
    fn broken_phase_names_column() {
        let mp = ModelParams::pt(0.0, 0.0, 3.0);
        match gate_matrix(&mp, 20.0, &IntegratorConfig::rk45(1.0, 1.0)) {
            Err(Error::BrokenPhase { column, .. }) => assert!(BasisLabel::ALL.iter().any(|l| l.as_str() == column)),
            other => panic!("expected broken phase, got {other:?}"),
        }
    }
}
