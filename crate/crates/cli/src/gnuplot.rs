//! Gnuplot scripts that plot the emitted CSV files by column name.

use std::path::Path;

use polsim_core::gate::BasisLabel;

use crate::error::CliError;

const PREAMBLE: &str =
    "set datafile separator \",\"\nset datafile missing \"NaN\"\nset terminal pngcairo size 1000,700\n";

fn write(dir: &Path, name: &str, body: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::write(&path, format!("{PREAMBLE}{body}")).map_err(|e| CliError::io(&path, e))
}

pub fn trajectory(dir: &Path, title: &str) -> Result<(), CliError> {
    let body = format!(
        "set output \"trajectory.png\"\n\
         set title \"{title}\"\n\
         set xlabel \"tau = tJ\"\n\
         set ylabel \"z\"\n\
         set yrange [-1.05:1.05]\n\
         plot \"trajectory.csv\" using \"tau\":\"z_plus\" with lines title \"z+\", \\\n\
         \x20    \"trajectory.csv\" using \"tau\":\"z_minus\" with lines dashtype 2 title \"z-\"\n"
    );
    write(dir, "trajectory.gp", &body)
}

pub fn stability(dir: &Path, title: &str) -> Result<(), CliError> {
    let mut body = format!(
        "set output \"stability.png\"\n\
         set title \"{title}\"\n\
         set xlabel \"gamma / J\"\n\
         set ylabel \"Re lambda / J\"\n\
         plot "
    );
    let curves: Vec<String> = (1..=4)
        .map(|k| format!("\"stability.csv\" using \"gamma\":\"re_l{k}\" with lines title \"Re l{k}\""))
        .collect();
    body.push_str(&curves.join(", \\\n     "));
    body.push('\n');
    write(dir, "stability.gp", &body)
}

pub fn gate(dir: &Path, title: &str) -> Result<(), CliError> {
    let mut body = format!(
        "set output \"gate.png\"\n\
         set terminal pngcairo size 1400,1200\n\
         set multiplot layout 4,4 title \"{title}\"\n\
         set y2range [-3.2:3.2]\n\
         set yrange [0:1.05]\n"
    );
    for output in BasisLabel::ALL {
        for input in BasisLabel::ALL {
            let (o, i) = (output.as_str(), input.as_str());
            body.push_str(&format!(
                "set title \"{o} <- {i}\"\n\
                 plot \"gate.csv\" using \"tau\":\"abs_{o}_{i}\" with lines notitle, \
                 \"gate.csv\" using \"tau\":\"arg_{o}_{i}\" axes x1y2 with lines dashtype 2 notitle\n"
            ));
        }
    }
    body.push_str("unset multiplot\n");
    write(dir, "gate.gp", &body)
}
