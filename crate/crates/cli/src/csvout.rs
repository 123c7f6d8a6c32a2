//! CSV writers. Floats are written with 17 significant digits in scientific
//! notation; undefined values are written as `NaN`.
//!
//! Column layouts:
//!
//! * `trajectory.csv` (full and reduced tiers): `tau`, `re_psi_<m>`,
//!   `im_psi_<m>` for each mode `m` in `L_plus, L_minus, R_plus, R_minus`
//!   order, `N_<m>`, `z_plus`, `z_minus`, `Phi_plus`, `Phi_minus`; the full
//!   tier appends `n_<m>` reservoir populations.
//! * `trajectory.csv` (zphi tier): `tau`, `z_plus`, `z_minus`, `Phi_plus`,
//!   `Phi_minus`.
//! * `stability.csv`: `gamma`, `re_l1`..`re_l4`, `im_l1`..`im_l4`, `class`,
//!   eigenvalues sorted by decreasing real then imaginary part.
//! * `gate.csv`: `tau`, then `abs_<out>_<in>` and `arg_<out>_<in>` for each
//!   input basis state `in` and output `out`, inputs outermost.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use polsim_core::gate::{BasisLabel, GateMatrix};
use polsim_core::integrator::Trajectory;
use polsim_core::model::{observables, FieldState, FullState, Mode, ZPhiState};
use polsim_core::stability::StabilityReport;

use crate::error::CliError;

pub fn float(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        format!("{v:.16e}")
    }
}

pub fn trajectory_header(full: bool) -> Vec<String> {
    let mut cols = vec!["tau".to_string()];
    for m in Mode::ALL {
        cols.push(format!("re_psi_{}", m.name()));
        cols.push(format!("im_psi_{}", m.name()));
    }
    for m in Mode::ALL {
        cols.push(format!("N_{}", m.name()));
    }
    cols.extend(["z_plus", "z_minus", "Phi_plus", "Phi_minus"].map(String::from));
    if full {
        for m in Mode::ALL {
            cols.push(format!("n_{}", m.name()));
        }
    }
    cols
}

pub fn zphi_header() -> Vec<String> {
    ["tau", "z_plus", "z_minus", "Phi_plus", "Phi_minus"].map(String::from).to_vec()
}

pub fn stability_header() -> Vec<String> {
    let mut cols = vec!["gamma".to_string()];
    cols.extend((1..=4).map(|k| format!("re_l{k}")));
    cols.extend((1..=4).map(|k| format!("im_l{k}")));
    cols.push("class".to_string());
    cols
}

pub fn gate_header() -> Vec<String> {
    let mut cols = vec!["tau".to_string()];
    for input in BasisLabel::ALL {
        for output in BasisLabel::ALL {
            cols.push(format!("abs_{}_{}", output.as_str(), input.as_str()));
            cols.push(format!("arg_{}_{}", output.as_str(), input.as_str()));
        }
    }
    cols
}

/// Buffered CSV file with a fixed header.
pub struct CsvWriter {
    out: BufWriter<File>,
    path: std::path::PathBuf,
    width: usize,
}

impl CsvWriter {
    pub fn create(path: &Path, header: &[String]) -> Result<Self, CliError> {
        let file = File::create(path).map_err(|e| CliError::io(path, e))?;
        let mut w = CsvWriter { out: BufWriter::new(file), path: path.to_path_buf(), width: header.len() };
        w.line(&header.join(","))?;
        Ok(w)
    }

    fn line(&mut self, text: &str) -> Result<(), CliError> {
        writeln!(self.out, "{text}").map_err(|e| CliError::io(&self.path, e))
    }

    pub fn row(&mut self, cells: &[String]) -> Result<(), CliError> {
        debug_assert_eq!(cells.len(), self.width);
        self.line(&cells.join(","))
    }

    pub fn floats(&mut self, values: &[f64]) -> Result<(), CliError> {
        let mut text = String::new();
        for (k, v) in values.iter().enumerate() {
            if k > 0 {
                text.push(',');
            }
            let _ = write!(text, "{}", float(*v));
        }
        debug_assert_eq!(values.len(), self.width);
        self.line(&text)
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.out.flush().map_err(|e| CliError::io(&self.path, e))
    }
}

fn field_values(tau: f64, fields: &FieldState) -> Vec<f64> {
    let mut v = vec![tau];
    for m in Mode::ALL {
        v.push(fields[m].re);
        v.push(fields[m].im);
    }
    let obs = observables(fields);
    for m in Mode::ALL {
        v.push(obs.populations[m]);
    }
    v.push(obs.z_plus.unwrap_or(f64::NAN));
    v.push(obs.z_minus.unwrap_or(f64::NAN));
    v.push(obs.phi_plus);
    v.push(obs.phi_minus);
    v
}

pub fn write_reduced(path: &Path, traj: &Trajectory<FieldState>) -> Result<(), CliError> {
    let mut w = CsvWriter::create(path, &trajectory_header(false))?;
    for (t, s) in traj.times.iter().zip(&traj.states) {
        w.floats(&field_values(*t, s))?;
    }
    w.finish()
}

pub fn write_full(path: &Path, traj: &Trajectory<FullState>) -> Result<(), CliError> {
    let mut w = CsvWriter::create(path, &trajectory_header(true))?;
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let mut v = field_values(*t, &s.fields);
        v.extend(Mode::ALL.map(|m| s.reservoirs[m]));
        w.floats(&v)?;
    }
    w.finish()
}

pub fn write_zphi(path: &Path, traj: &Trajectory<ZPhiState>) -> Result<(), CliError> {
    let mut w = CsvWriter::create(path, &zphi_header())?;
    for (t, s) in traj.times.iter().zip(&traj.states) {
        w.floats(&[*t, s.z_plus, s.z_minus, s.phi_plus, s.phi_minus])?;
    }
    w.finish()
}

pub fn sorted_eigenvalues(eigs: &[Complex64; 4]) -> [Complex64; 4] {
    let mut e = *eigs;
    e.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    e
}

pub fn stability_cells(gamma: f64, report: &StabilityReport) -> Vec<String> {
    let e = sorted_eigenvalues(&report.eigenvalues);
    let mut cells = vec![float(gamma)];
    cells.extend(e.iter().map(|l| float(l.re)));
    cells.extend(e.iter().map(|l| float(l.im)));
    cells.push(report.classification.as_str().to_string());
    cells
}

pub fn write_stability<'a>(
    path: &Path,
    rows: impl IntoIterator<Item = (f64, &'a StabilityReport)>,
) -> Result<(), CliError> {
    let mut w = CsvWriter::create(path, &stability_header())?;
    for (gamma, report) in rows {
        w.row(&stability_cells(gamma, report))?;
    }
    w.finish()
}

pub fn gate_values(tau: f64, gate: &GateMatrix) -> Vec<f64> {
    let mut v = vec![tau];
    for input in BasisLabel::ALL {
        for output in BasisLabel::ALL {
            let c = gate.entry(output, input);
            v.push(c.norm());
            v.push(c.arg());
        }
    }
    v
}

pub fn write_gate(path: &Path, series: &[(f64, GateMatrix)]) -> Result<(), CliError> {
    let mut w = CsvWriter::create(path, &gate_header())?;
    for (tau, gate) in series {
        w.floats(&gate_values(*tau, gate))?;
    }
    w.finish()
}
