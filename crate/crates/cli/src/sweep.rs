use std::path::Path;

use polsim_core::gate::{gate_fidelity, gate_matrix_with_amplitude, optimal_swap_time};
use polsim_core::stability::analyze_trivial;
use polsim_core::ModelParams;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{FidelitySpec, GateTime, SweepConfig, SweepKind};
use crate::csvout::{self, float, CsvWriter};
use crate::error::CliError;
use crate::run::write_json;

pub const AXIS_COLUMNS: [&str; 3] = ["gsN_over_J", "gcN_over_J", "gamma_over_J"];

pub fn header(kind: SweepKind) -> Vec<String> {
    let mut cols: Vec<String> = AXIS_COLUMNS.map(String::from).to_vec();
    match kind {
        SweepKind::Stability => cols.extend(csvout::stability_header().into_iter().skip(1)),
        SweepKind::Fidelity => cols.extend(["t_tau", "fidelity"].map(String::from)),
    }
    cols
}

fn stability_row(params: &ModelParams, gamma: f64) -> Result<Vec<String>, CliError> {
    let (analytic, _) = analyze_trivial(params)?;
    Ok(csvout::stability_cells(gamma, &analytic).into_iter().skip(1).collect())
}

fn fidelity_row(params: &ModelParams, gamma: f64, spec: &FidelitySpec) -> Result<Vec<String>, CliError> {
    let t = match spec.t {
        GateTime::Fixed(t) => t,
        GateTime::Named(_) => optimal_swap_time(params.j, gamma)?,
    };
    let cfg = spec.integrator.config("fidelity.integrator")?;
    let u = gate_matrix_with_amplitude(params, t, &cfg, spec.basis_amplitude)?;
    let target = spec.target.matrix().expect("validated named target");
    Ok(vec![float(t), float(gate_fidelity(&u, &target))])
}

pub fn run_sweep(config: &Path, out: &Path) -> Result<Value, CliError> {
    let sweep = SweepConfig::load(config)?.validate()?;
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let mut points = Vec::with_capacity(sweep.gs.len() * sweep.gc.len() * sweep.gamma.len());
    for &gs in &sweep.gs {
        for &gc in &sweep.gc {
            points.extend(sweep.gamma.iter().map(|&g| (gs, gc, g)));
        }
    }
    let rows = points
        .par_iter()
        .map(|&(gs, gc, gamma)| {
            let params = ModelParams::pt(gs, gc, gamma);
            let mut cells = vec![float(gs), float(gc), float(gamma)];
            cells.extend(match sweep.kind {
                SweepKind::Stability => stability_row(&params, gamma)?,
                SweepKind::Fidelity => fidelity_row(&params, gamma, sweep.fidelity.as_ref().expect("validated"))?,
            });
            Ok(cells)
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let mut w = CsvWriter::create(&out.join("sweep.csv"), &header(sweep.kind))?;
    for row in &rows {
        w.row(row)?;
    }
    w.finish()?;
    let summary = json!({ "kind": sweep.kind, "rows": rows.len(), "files": ["sweep.csv", "sweep_summary.json"] });
    write_json(&out.join("sweep_summary.json"), &summary)?;
    Ok(summary)
}
