//! CSV and JSON writers. Floats are printed with 17 significant digits so identical runs give
//! byte-identical files.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use fibersr::{Peak, Trajectory};
use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;

pub const TRAJECTORY_HEADER: &str = "t_tau0,P,JpJm,i_guided_I0,i_rad_I0,i_total_I0";
pub const SWEEP_HEADER: &str = "n,f_guided";

pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Where a CSV or summary goes.
pub enum Sink<'a> {
    File(&'a Path),
    Stdout,
    Stderr,
}

impl Sink<'_> {
    pub fn write_with(&self, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), CliError> {
        match self {
            Sink::File(path) => {
                if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
                }
                let file = File::create(path).map_err(|e| CliError::io(path, e))?;
                let mut w = BufWriter::new(file);
                f(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
            }
            Sink::Stdout => {
                let out = io::stdout();
                let mut w = out.lock();
                f(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::io(Path::new("<stdout>"), e))
            }
            Sink::Stderr => {
                let out = io::stderr();
                let mut w = out.lock();
                f(&mut w).map_err(|e| CliError::io(Path::new("<stderr>"), e))
            }
        }
    }
}

/// Rows to keep when thinning by `every`; the last row always survives.
fn kept_rows(len: usize, every: usize) -> impl Iterator<Item = usize> {
    let every = every.max(1);
    (0..len).filter(move |&k| k % every == 0 || k + 1 == len)
}

pub fn write_trajectory(w: &mut dyn Write, traj: &Trajectory, every: usize) -> io::Result<()> {
    writeln!(w, "{TRAJECTORY_HEADER}")?;
    for k in kept_rows(traj.len(), every) {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            float(traj.times()[k]),
            float(traj.population()[k]),
            float(traj.jpjm()[k]),
            float(traj.i_guided()[k]),
            float(traj.i_rad()[k]),
            float(traj.i_total()[k]),
        )?;
    }
    Ok(())
}

pub fn write_sweep(w: &mut dyn Write, rows: &[(usize, f64)]) -> io::Result<()> {
    writeln!(w, "{SWEEP_HEADER}")?;
    for (n, f) in rows {
        writeln!(w, "{n},{}", float(*f))?;
    }
    Ok(())
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PeakRecord {
    Local { t_max_tau0: f64, i_max_I0: f64 },
    MonotonicDecrease,
}

impl From<Peak> for PeakRecord {
    fn from(p: Peak) -> Self {
        match p {
            Peak::Local { t_max, i_max } => Self::Local {
                t_max_tau0: t_max,
                i_max_I0: i_max,
            },
            Peak::MonotonicDecrease => Self::MonotonicDecrease,
        }
    }
}

/// JSON summary. Field order is the output key order; units are part of the key names.
#[allow(non_snake_case)]
#[derive(Debug, Clone, Default, Serialize)]
pub struct Summary {
    pub command: &'static str,
    pub input: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytic_model: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_guided_gamma0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_rad_gamma0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub Gamma_gamma0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_a_tau0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_p_tau0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub peak: Option<PeakRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_guided_analytic: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_guided_numeric: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u_guided_hbar_omega0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u_rad_hbar_omega0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation_bound_hbar_omega0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget_residual_hbar_omega0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abs_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_final_tau0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accepted_steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rejected_steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_trace_drift: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub L0_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub linewidth_MHz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub validity: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geometry: Option<fibersr::GeometryMetadata>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub skipped: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

pub fn write_summary(sink: &Sink, summary: &Summary) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(summary).expect("summary serializes");
    sink.write_with(|w| writeln!(w, "{text}"))
}
