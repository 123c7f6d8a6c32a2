//! Fixed points of the z-Phi equations and their linear stability.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{ensure_finite, Error, Result};
use crate::model::{wrap_phase, zphi_derivative, ModelParams, ZPhiState};

/// Real-part tolerance used when classifying eigenvalues.
pub const CLASSIFY_TOL: f64 = 1e-9;

/// Finite-difference step of the numeric Jacobian.
pub const JACOBIAN_STEP: f64 = 1e-6;

const NEWTON_MAX_ITER: usize = 100;
const NEWTON_TOL: f64 = 1e-12;
const DEDUP_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    /// All real parts negative.
    Stable,
    /// At least one positive real part.
    Unstable,
    /// All eigenvalues on the imaginary axis.
    Elliptic,
    /// Some real parts negative and the rest zero.
    Marginal,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Stable => "stable",
            Classification::Unstable => "unstable",
            Classification::Elliptic => "elliptic",
            Classification::Marginal => "marginal",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EigenSource {
    Analytic,
    Numeric,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StabilityReport {
    /// `None` past the exceptional point, where the analytic eigenvalues are
    /// continued but no fixed point exists.
    pub fixed_point: Option<ZPhiState>,
    pub eigenvalues: [Complex64; 4],
    pub classification: Classification,
    pub source: EigenSource,
}

impl StabilityReport {
    pub fn max_real_part(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn classify(eigs: &[Complex64], tol: f64) -> Classification {
    if eigs.iter().any(|l| l.re > tol) {
        Classification::Unstable
    } else if eigs.iter().all(|l| l.re.abs() <= tol) {
        Classification::Elliptic
    } else if eigs.iter().all(|l| l.re < -tol) {
        Classification::Stable
    } else {
        Classification::Marginal
    }
}

/// `z = 0`, `sin Phi = gamma / J` for both species.
pub fn trivial_fixed_point(j: f64, gamma: f64) -> Result<ZPhiState> {
    ensure_finite("J", j)?;
    ensure_finite("gamma", gamma)?;
    if j <= 0.0 {
        return Err(Error::InvalidParameter { name: "J", reason: format!("must be > 0, got {j}") });
    }
    if gamma.abs() > j {
        return Err(Error::NoFixedPoint { gamma: gamma.abs(), j });
    }
    let phi = (gamma / j).clamp(-1.0, 1.0).asin();
    Ok(ZPhiState::new(0.0, 0.0, phi, phi))
}

struct ZPhiField {
    gamma_over_j: f64,
    u_s: f64,
    u_c: f64,
}

impl ZPhiField {
    fn new(mp: &ModelParams) -> Result<Self> {
        mp.validate()?;
        let gamma = mp.balanced_gamma()?;
        Ok(ZPhiField { gamma_over_j: gamma / mp.j, u_s: mp.u_s, u_c: mp.u_c })
    }

    fn eval(&self, x: &Vector4<f64>) -> Vector4<f64> {
        let d = zphi_derivative(&ZPhiState::new(x[0], x[1], x[2], x[3]), self.gamma_over_j, self.u_s, self.u_c);
        Vector4::from(d.to_array())
    }

    fn jacobian(&self, x: &Vector4<f64>) -> Matrix4<f64> {
        let mut jac = Matrix4::zeros();
        for k in 0..4 {
            let mut plus = *x;
            let mut minus = *x;
            plus[k] += JACOBIAN_STEP;
            minus[k] -= JACOBIAN_STEP;
            let column = (self.eval(&plus) - self.eval(&minus)) / (2.0 * JACOBIAN_STEP);
            jac.set_column(k, &column);
        }
        jac
    }
}

/// Central-difference Jacobian of the z-Phi equations, coordinates ordered
/// `(z+, z-, Phi+, Phi-)`.
pub fn jacobian_numeric(point: &ZPhiState, mp: &ModelParams) -> Result<Matrix4<f64>> {
    let field = ZPhiField::new(mp)?;
    for z in [point.z_plus, point.z_minus] {
        if z.abs() + JACOBIAN_STEP >= 1.0 {
            return Err(Error::SingularRepresentation { z });
        }
    }
    Ok(field.jacobian(&Vector4::from(point.to_array())))
}

pub fn matrix_eigenvalues(m: &Matrix4<f64>) -> [Complex64; 4] {
    let eigs = m.complex_eigenvalues();
    [eigs[0], eigs[1], eigs[2], eigs[3]]
}

/// `+-sqrt(-4 Omega^2 - 2 (g_s +- g_c) Omega) / J` with `Omega = sqrt(J^2 - gamma^2)`
/// and `g = u J`. Past `|gamma| = J` the expression is continued with complex
/// `Omega`.
pub fn stability_eigenvalues_analytic(j: f64, gamma: f64, u_s: f64, u_c: f64) -> Result<[Complex64; 4]> {
    for (name, v) in [("J", j), ("gamma", gamma), ("u_s", u_s), ("u_c", u_c)] {
        ensure_finite(name, v)?;
    }
    if j <= 0.0 {
        return Err(Error::InvalidParameter { name: "J", reason: format!("must be > 0, got {j}") });
    }
    let omega = Complex64::new(j * j - gamma * gamma, 0.0).sqrt();
    let branch = |g: f64| (-4.0 * omega * omega - 2.0 * g * j * omega).sqrt() / j;
    let a = branch(u_s + u_c);
    let b = branch(u_s - u_c);
    Ok([a, -a, b, -b])
}

/// Smallest `gamma` at which an eigenvalue of the trivial fixed point leaves
/// the imaginary axis.
pub fn bifurcation_threshold(j: f64, u_s: f64, u_c: f64) -> f64 {
    // A branch with effective interaction g turns real once 2 Omega < -g.
    [u_s + u_c, u_s - u_c]
        .iter()
        .map(|&g| {
            let d = -g / 2.0;
            if d <= 0.0 {
                j
            } else if d >= 1.0 {
                0.0
            } else {
                j * (1.0 - d * d).sqrt()
            }
        })
        .fold(j, f64::min)
}

/// Analytic and numeric stability of the trivial fixed point. The numeric
/// report is `None` when the fixed point does not exist.
pub fn analyze_trivial(mp: &ModelParams) -> Result<(StabilityReport, Option<StabilityReport>)> {
    let gamma = mp.balanced_gamma()?;
    let eigenvalues = stability_eigenvalues_analytic(mp.j, gamma, mp.u_s, mp.u_c)?;
    let fixed_point = trivial_fixed_point(mp.j, gamma).ok();
    let analytic = StabilityReport {
        fixed_point,
        eigenvalues,
        classification: classify(&eigenvalues, CLASSIFY_TOL),
        source: EigenSource::Analytic,
    };
    let numeric = match fixed_point {
        Some(point) if gamma.abs() < mp.j => {
            let eigenvalues = matrix_eigenvalues(&jacobian_numeric(&point, mp)?);
            Some(StabilityReport {
                fixed_point: Some(point),
                eigenvalues,
                classification: classify(&eigenvalues, CLASSIFY_TOL),
                source: EigenSource::Numeric,
            })
        }
        _ => None,
    };
    Ok((analytic, numeric))
}

/// Distance between two eigenvalue multisets: the best matching's largest
/// pairwise gap.
pub fn multiset_distance(a: &[Complex64; 4], b: &[Complex64; 4]) -> f64 {
    let mut best = f64::INFINITY;
    let mut perm = [0usize, 1, 2, 3];
    permutations(&mut perm, 0, &mut |p| {
        let worst = (0..4).map(|i| (a[i] - b[p[i]]).norm()).fold(0.0, f64::max);
        best = best.min(worst);
    });
    best
}

fn permutations(p: &mut [usize; 4], k: usize, visit: &mut impl FnMut(&[usize; 4])) {
    if k == p.len() {
        visit(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permutations(p, k + 1, visit);
        p.swap(k, i);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NewtonFailure {
    OutsideDomain,
    SingularJacobian,
    MaxIterations,
    Stalled,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeedFailure {
    pub seed: ZPhiState,
    pub reason: NewtonFailure,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct FixedPointSearch {
    /// Distinct roots with phases wrapped to (-pi, pi].
    pub roots: Vec<ZPhiState>,
    pub failures: Vec<SeedFailure>,
}

fn newton(field: &ZPhiField, seed: &ZPhiState) -> std::result::Result<ZPhiState, NewtonFailure> {
    let in_domain = |x: &Vector4<f64>| x[0].abs() < 1.0 && x[1].abs() < 1.0 && x.iter().all(|v| v.is_finite());
    let mut x = Vector4::from(seed.to_array());
    if !in_domain(&x) {
        return Err(NewtonFailure::OutsideDomain);
    }
    let mut residual = field.eval(&x);
    for _ in 0..NEWTON_MAX_ITER {
        if residual.norm() < NEWTON_TOL {
            return Ok(ZPhiState::new(x[0], x[1], wrap_phase(x[2]), wrap_phase(x[3])));
        }
        let step = field.jacobian(&x).lu().solve(&(-residual)).ok_or(NewtonFailure::SingularJacobian)?;
        let mut scale = 1.0;
        loop {
            let trial = x + step * scale;
            if in_domain(&trial) {
                let r = field.eval(&trial);
                if r.norm() < residual.norm() || scale < 1e-3 && r.norm().is_finite() {
                    x = trial;
                    residual = r;
                    break;
                }
            }
            scale *= 0.5;
            if scale < 1e-10 {
                return Err(NewtonFailure::Stalled);
            }
        }
    }
    if residual.norm() < NEWTON_TOL {
        Ok(ZPhiState::new(x[0], x[1], wrap_phase(x[2]), wrap_phase(x[3])))
    } else {
        Err(NewtonFailure::MaxIterations)
    }
}

fn same_root(a: &ZPhiState, b: &ZPhiState) -> bool {
    (a.z_plus - b.z_plus).abs() < DEDUP_TOL
        && (a.z_minus - b.z_minus).abs() < DEDUP_TOL
        && wrap_phase(a.phi_plus - b.phi_plus).abs() < DEDUP_TOL
        && wrap_phase(a.phi_minus - b.phi_minus).abs() < DEDUP_TOL
}

/// Damped Newton iteration on the z-Phi equations from each seed.
/// Non-converging seeds are recorded, not reported as errors.
pub fn find_fixed_points(mp: &ModelParams, seeds: &[ZPhiState]) -> Result<FixedPointSearch> {
    let field = ZPhiField::new(mp)?;
    let outcomes: Vec<_> = seeds.par_iter().map(|seed| (seed, newton(&field, seed))).collect();
    let mut search = FixedPointSearch::default();
    for (seed, outcome) in outcomes {
        match outcome {
            Ok(root) => {
                if !search.roots.iter().any(|r| same_root(r, &root)) {
                    search.roots.push(root);
                }
            }
            Err(reason) => search.failures.push(SeedFailure { seed: *seed, reason }),
        }
    }
    Ok(search)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub gamma: f64,
    pub analytic: StabilityReport,
    pub numeric: Option<StabilityReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GammaSweep {
    pub rows: Vec<SweepRow>,
    /// First grid value whose analytic eigenvalues leave the imaginary axis.
    pub bifurcation: Option<f64>,
    /// Closed-form threshold for comparison.
    pub threshold: f64,
}

/// Stability of the trivial fixed point over a grid of balanced rates; the
/// rates in `mp` are replaced by each grid value.
pub fn sweep_gamma(mp: &ModelParams, gamma_grid: &[f64]) -> Result<GammaSweep> {
    mp.validate()?;
    let rows = gamma_grid
        .par_iter()
        .map(|&gamma| {
            let params = mp.with_pt_gamma(gamma);
            let (analytic, numeric) = analyze_trivial(&params)?;
            Ok(SweepRow { gamma, analytic, numeric })
        })
        .collect::<Result<Vec<_>>>()?;
    let bifurcation = rows.iter().find(|row| row.analytic.max_real_part() > CLASSIFY_TOL).map(|row| row.gamma);
    Ok(GammaSweep { rows, bifurcation, threshold: bifurcation_threshold(mp.j, mp.u_s, mp.u_c) })
}
