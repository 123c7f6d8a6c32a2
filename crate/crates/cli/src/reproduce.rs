//! Reference figures and tables. Each job writes its data and a
//! `summary.json` of scalar checks into its own directory.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::path::Path;

use polsim_core::analysis::{fit_log_rate, max_abs_deviation, modulation_period, revival_times, window_envelope};
use polsim_core::gate::{
    gate_fidelity, gate_matrix, gate_time_series, optimal_swap_time, table1_reference, target_swap, GateMatrix,
};
use polsim_core::integrator::{IntegratorConfig, Trajectory};
use polsim_core::model::FieldState;
use polsim_core::presets::{self, DynamicsPreset, FIDELITY_CASES};
use polsim_core::stability::{multiset_distance, sweep_gamma};
use polsim_core::{evolve_reduced, ModelParams};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::csvout::{self, CsvWriter};
use crate::error::CliError;
use crate::gnuplot;
use crate::run::write_json;

pub const FIGURES: [(&str, &str); 9] = [
    ("fig2", "stability eigenvalues vs gamma, gsN = J, gcN = 0.9J"),
    ("fig3a", "Hermitian Rabi oscillations, gamma = 0"),
    ("fig3b", "unbalanced gain 0.1J and loss -0.2J"),
    ("fig3c", "balanced gamma = 0.1J, gsN = J, gcN = 0.8J"),
    ("fig3d", "balanced gamma = 0.1J, gsN = gcN = J"),
    ("fig3e", "balanced gamma = 0.1J, gsN = J, gcN = 1.2J"),
    ("fig4", "gate amplitudes up to t = pi/J, gsN = J, gcN = 0.5J, gamma = 0.1J"),
    ("table1", "Hermitian non-interacting gate vs closed form"),
    ("fidelity-table", "SWAP fidelities of the eight reference parameter sets"),
];

const SAMPLE_TAU: f64 = 0.01;

pub fn unknown_figure(id: &str) -> CliError {
    let ids: Vec<&str> = FIGURES.iter().map(|f| f.0).collect();
    CliError::Config(format!("unknown figure id `{id}`; valid ids: {}, all", ids.join(", ")))
}

fn z_series(traj: &Trajectory<FieldState>) -> (Vec<f64>, Vec<f64>) {
    traj.observables().iter().map(|o| (o.z_plus.unwrap_or(f64::NAN), o.z_minus.unwrap_or(f64::NAN))).unzip()
}

fn dynamics(preset: DynamicsPreset, out: &Path, title: &str) -> Result<Trajectory<FieldState>, CliError> {
    let cfg = IntegratorConfig::rk45(preset.tau_end, SAMPLE_TAU);
    let traj = evolve_reduced(&preset.params, &presets::default_initial_state(), &cfg)?;
    csvout::write_reduced(&out.join("trajectory.csv"), &traj)?;
    gnuplot::trajectory(out, title)?;
    Ok(traj)
}

fn fig2(out: &Path) -> Result<Value, CliError> {
    let grid: Vec<f64> = (0..=1200).map(|k| k as f64 * 0.001).collect();
    let sweep = sweep_gamma(&presets::stability_params(), &grid)?;
    csvout::write_stability(&out.join("stability.csv"), sweep.rows.iter().map(|r| (r.gamma, &r.analytic)))?;
    gnuplot::stability(out, "Re lambda, gsN = J, gcN = 0.9J")?;
    let numeric_gap = sweep
        .rows
        .iter()
        .filter_map(|r| r.numeric.map(|n| multiset_distance(&r.analytic.eigenvalues, &n.eigenvalues)))
        .fold(0.0, f64::max);
    Ok(json!({
        "bifurcation_gamma_over_J": sweep.bifurcation,
        "threshold_gamma_over_J": sweep.threshold,
        "max_analytic_numeric_distance": numeric_gap,
    }))
}

fn fig3a(out: &Path) -> Result<Value, CliError> {
    let traj = dynamics(presets::hermitian_rabi(), out, "gamma = 0, no interaction")?;
    let (zp, zm) = z_series(&traj);
    let rabi: Vec<f64> = traj.times.iter().map(|t| (2.0 * t).cos()).collect();
    let anti: Vec<f64> = rabi.iter().map(|c| -c).collect();
    Ok(json!({
        "max_deviation_z_plus_from_cos_2tau": max_abs_deviation(&zp, &rabi),
        "max_deviation_z_minus_from_minus_cos_2tau": max_abs_deviation(&zm, &anti),
    }))
}

fn fig3b(out: &Path) -> Result<Value, CliError> {
    let preset = presets::unbalanced_decay();
    let traj = dynamics(preset, out, "gamma_L = 0.1J, gamma_R = -0.2J")?;
    let totals: Vec<f64> = traj.states.iter().map(|s| s.total_population()).collect();
    let expected_rate = preset.params.gamma.l_plus + preset.params.gamma.r_plus;
    let rate = fit_log_rate(&traj.times, &totals)?;
    let pointwise =
        traj.times.iter().zip(&totals).map(|(t, n)| (n / (expected_rate * t).exp() - 1.0).abs()).fold(0.0, f64::max);
    Ok(json!({
        "envelope_rate": rate,
        "expected_rate": expected_rate,
        "max_relative_deviation_from_exponential": pointwise,
    }))
}

fn interacting(u_s: f64, u_c: f64, out: &Path, title: &str) -> Result<(Trajectory<FieldState>, Value), CliError> {
    let preset = presets::pt_interacting(u_s, u_c);
    let traj = dynamics(preset, out, title)?;
    let (zp, _) = z_series(&traj);
    let cfg = IntegratorConfig::rk45(preset.tau_end, SAMPLE_TAU);
    let hermitian = evolve_reduced(&ModelParams::new(1.0, u_s, u_c), &presets::default_initial_state(), &cfg)?;
    let (hp, _) = z_series(&hermitian);
    let rabi: Vec<f64> = traj.times.iter().map(|t| (2.0 * t).cos()).collect();
    let peaks = |z: &[f64]| window_envelope(&traj.times, z, PI).into_iter().map(|w| w.1).collect::<Vec<_>>();
    let envelope = peaks(&zp);
    let summary = json!({
        "revival_times": revival_times(&traj.times, &zp, PI, 0.9),
        "min_envelope": envelope.iter().copied().fold(f64::INFINITY, f64::min),
        "max_envelope_deviation_from_hermitian_same_interaction": max_abs_deviation(&envelope, &peaks(&hp)),
        "max_envelope_deviation_from_linear_rabi": max_abs_deviation(&envelope, &peaks(&rabi)),
        "max_deviation_from_hermitian_same_interaction": max_abs_deviation(&zp, &hp),
        "max_deviation_from_linear_rabi": max_abs_deviation(&zp, &rabi),
    });
    Ok((traj, summary))
}

fn fig3c(out: &Path) -> Result<Value, CliError> {
    Ok(interacting(1.0, 0.8, out, "gamma = 0.1J, gsN = J, gcN = 0.8J")?.1)
}

fn fig3d(out: &Path) -> Result<Value, CliError> {
    let (traj, mut summary) = interacting(1.0, 1.0, out, "gamma = 0.1J, gsN = gcN = J")?;
    let (zp, _) = z_series(&traj);
    let expected = 4.0 * PI / (0.1 * 1.0);
    summary["modulation_period"] = json!(modulation_period(&traj.times, &zp, PI));
    summary["expected_period"] = json!(expected);
    Ok(summary)
}

fn fig3e(out: &Path) -> Result<Value, CliError> {
    Ok(interacting(1.0, 1.2, out, "gamma = 0.1J, gsN = J, gcN = 1.2J")?.1)
}

fn gate_cfg() -> IntegratorConfig {
    IntegratorConfig::rk45(1.0, 1.0)
}

fn fig4(out: &Path) -> Result<Value, CliError> {
    let params = presets::gate_series_params();
    let series = gate_time_series(&params, PI, SAMPLE_TAU, &gate_cfg(), FRAC_1_SQRT_2)?;
    csvout::write_gate(&out.join("gate.csv"), &series)?;
    gnuplot::gate(out, "gsN = J, gcN = 0.5J, gamma = 0.1J")?;
    let at_half = gate_matrix(&params, PI / 2.0, &gate_cfg())?;
    Ok(json!({ "samples": series.len(), "swap_fidelity_at_half_pi": gate_fidelity(&at_half, &target_swap()) }))
}

fn table1(out: &Path) -> Result<Value, CliError> {
    let series = gate_time_series(&ModelParams::new(1.0, 0.0, 0.0), PI, SAMPLE_TAU, &gate_cfg(), FRAC_1_SQRT_2)?;
    csvout::write_gate(&out.join("gate.csv"), &series)?;
    let reference: Vec<(f64, GateMatrix)> = series.iter().map(|(t, _)| (*t, table1_reference(1.0, *t))).collect();
    csvout::write_gate(&out.join("reference.csv"), &reference)?;
    gnuplot::gate(out, "gamma = 0, no interaction")?;
    let worst = series.iter().zip(&reference).map(|((_, u), (_, r))| u.max_abs_diff(r)).fold(0.0, f64::max);
    Ok(json!({ "samples": series.len(), "max_abs_diff_from_reference": worst }))
}

fn fidelity_table(out: &Path) -> Result<Value, CliError> {
    let rows = FIDELITY_CASES
        .par_iter()
        .map(|&(u_s, u_c, gamma, reference)| {
            let params = ModelParams::pt(u_s, u_c, gamma);
            let half = gate_fidelity(&gate_matrix(&params, PI / 2.0, &gate_cfg())?, &target_swap());
            let t_opt = optimal_swap_time(1.0, gamma)?;
            let opt = gate_fidelity(&gate_matrix(&params, t_opt, &gate_cfg())?, &target_swap());
            Ok([u_s, u_c, gamma, reference, half, t_opt, opt])
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let header = [
        "gsN_over_J",
        "gcN_over_J",
        "gamma_over_J",
        "reference_fidelity",
        "fidelity_half_pi",
        "t_optimal",
        "fidelity_optimal",
    ]
    .map(String::from);
    let mut w = CsvWriter::create(&out.join("fidelities.csv"), &header)?;
    for row in &rows {
        w.floats(row)?;
    }
    w.finish()?;
    let table: Vec<Value> = rows
        .iter()
        .map(|r| json!({ "gsN_over_J": r[0], "gcN_over_J": r[1], "gamma_over_J": r[2], "reference": r[3], "fidelity": r[4], "difference": r[4] - r[3] }))
        .collect();
    Ok(json!({
        "rows": table,
        "max_abs_difference": rows.iter().map(|r| (r[4] - r[3]).abs()).fold(0.0, f64::max),
    }))
}

type Job = fn(&Path) -> Result<Value, CliError>;

fn job(id: &str) -> Option<Job> {
    Some(match id {
        "fig2" => fig2,
        "fig3a" => fig3a,
        "fig3b" => fig3b,
        "fig3c" => fig3c,
        "fig3d" => fig3d,
        "fig3e" => fig3e,
        "fig4" => fig4,
        "table1" => table1,
        "fidelity-table" => fidelity_table,
        _ => return None,
    })
}

fn run_job(id: &str, out: &Path) -> Result<Value, CliError> {
    let f = job(id).ok_or_else(|| unknown_figure(id))?;
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let mut summary = f(out)?;
    summary["figure"] = json!(id);
    write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}

/// Runs one figure into `out`, or every figure into `out/<id>` for `all`.
pub fn reproduce(id: &str, out: &Path) -> Result<Value, CliError> {
    if id != "all" {
        return run_job(id, out);
    }
    let summaries = FIGURES.par_iter().map(|(id, _)| run_job(id, &out.join(id))).collect::<Result<Vec<_>, _>>()?;
    let summary = Value::Array(summaries);
    write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}
