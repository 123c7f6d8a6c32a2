use std::path::Path;

use polsim_core::gate::gate_time_series;
use polsim_core::integrator::Stats;
use polsim_core::stability::sweep_gamma;
use polsim_core::{evolve_full, evolve_reduced, evolve_zphi, Error};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Scenario, Tier, ValidScenario};
use crate::error::CliError;
use crate::{csvout, gnuplot};

#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub tier: Tier,
    pub files: Vec<String>,
    pub trajectory: Option<Value>,
    pub stability: Option<Value>,
    pub gate: Option<Value>,
}

fn trajectory_summary(samples: usize, tau_end: Option<f64>, diverged_at: Option<f64>, stats: Stats) -> Value {
    json!({
        "samples": samples,
        "tau_last": tau_end,
        "diverged_at": diverged_at,
        "accepted_steps": stats.accepted,
        "rejected_steps": stats.rejected,
        "rhs_evaluations": stats.rhs_evals,
    })
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("summary serializes");
    std::fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
}

fn run_trajectory(s: &ValidScenario, out: &Path) -> Result<Value, CliError> {
    let path = out.join("trajectory.csv");
    let summary = match s.tier {
        Tier::Reduced => {
            let traj = evolve_reduced(&s.params, &s.fields.expect("validated"), &s.integrator)?;
            csvout::write_reduced(&path, &traj)?;
            trajectory_summary(traj.len(), traj.last().map(|l| l.0), traj.diverged_at, traj.stats)
        }
        Tier::Full => {
            let rp = s.reservoirs.expect("validated");
            let state0 = polsim_core::FullState::with_steady_reservoirs(s.fields.expect("validated"), &rp)
                .map_err(|e| CliError::Config(format!("reservoir: {e}")))?;
            let traj = evolve_full(&s.params, &rp, &state0, &s.integrator)?;
            csvout::write_full(&path, &traj)?;
            trajectory_summary(traj.len(), traj.last().map(|l| l.0), traj.diverged_at, traj.stats)
        }
        Tier::Zphi => {
            let traj = evolve_zphi(&s.params, &s.zphi.expect("validated"), &s.integrator)?;
            csvout::write_zphi(&path, &traj)?;
            trajectory_summary(traj.len(), traj.last().map(|l| l.0), traj.diverged_at, traj.stats)
        }
    };
    gnuplot::trajectory(out, "population imbalance")?;
    Ok(summary)
}

fn run_stability(s: &ValidScenario, grid: &[f64], out: &Path) -> Result<Value, CliError> {
    let sweep = sweep_gamma(&s.params, grid)?;
    csvout::write_stability(&out.join("stability.csv"), sweep.rows.iter().map(|r| (r.gamma, &r.analytic)))?;
    gnuplot::stability(out, "stability of the trivial fixed point")?;
    Ok(json!({
        "rows": grid.len(),
        "bifurcation_gamma_over_J": sweep.bifurcation,
        "threshold_gamma_over_J": sweep.threshold,
    }))
}

fn run_gate(s: &ValidScenario, out: &Path) -> Result<Value, CliError> {
    let spec = s.gate.expect("requested");
    match gate_time_series(&s.params, spec.tau_end, spec.sample_every_tau, &s.integrator, spec.basis_amplitude) {
        Ok(series) => {
            csvout::write_gate(&out.join("gate.csv"), &series)?;
            gnuplot::gate(out, "gate matrix elements")?;
            Ok(json!({ "samples": series.len(), "diverged_at": null }))
        }
        Err(Error::BrokenPhase { column, tau }) => Ok(json!({
            "samples": 0,
            "diverged_at": if tau.is_finite() { Some(tau) } else { None },
            "diverged_column": column,
        })),
        Err(e) => Err(e.into()),
    }
}

pub fn run_scenario(config: &Path, out: &Path) -> Result<RunSummary, CliError> {
    let scenario = Scenario::load(config)?;
    let valid = scenario.validate()?;
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let mut summary = RunSummary { tier: valid.tier, files: Vec::new(), trajectory: None, stability: None, gate: None };
    if valid.trajectory {
        summary.trajectory = Some(run_trajectory(&valid, out)?);
        summary.files.extend(["trajectory.csv".into(), "trajectory.gp".into()]);
    }
    if let Some(grid) = &valid.stability_grid {
        summary.stability = Some(run_stability(&valid, grid, out)?);
        summary.files.extend(["stability.csv".into(), "stability.gp".into()]);
    }
    if valid.gate.is_some() {
        let gate = run_gate(&valid, out)?;
        if gate["samples"].as_u64() != Some(0) {
            summary.files.extend(["gate.csv".into(), "gate.gp".into()]);
        }
        summary.gate = Some(gate);
    }
    summary.files.push("run_summary.json".into());
    write_json(&out.join("run_summary.json"), &summary)?;
    Ok(summary)
}
