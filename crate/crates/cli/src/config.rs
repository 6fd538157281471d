//! Command parameters, shared by flags and config files.
//!
//! A config file is a flat TOML or JSON table whose keys are the long flag names. Flags given
//! on the command line override file values; keys that match no flag are rejected.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use fibersr::GeometryMetadata;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Symmetric,
    Meanfield,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Solver {
    Exact,
    Dicke,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Init {
    Symmetric,
    Product,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Fig3,
    Fig4a,
    Fig4b,
    Fig5a,
    Fig5b,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Self::Fig3 => "fig3",
            Self::Fig4a => "fig4a",
            Self::Fig4b => "fig4b",
            Self::Fig5a => "fig5a",
            Self::Fig5b => "fig5b",
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct AnalyticParams {
    /// Closed form to evaluate
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    /// Number of atoms
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Product-state polar angle (meanfield mode), radians; 0 is full excitation
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    /// Guided-mode decay rate, units of γ0
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_guided: Option<f64>,
    /// Radiation-mode decay rate, units of γ0
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_rad: Option<f64>,
    /// Rate table CSV (distance_nm,gamma_guided,gamma_rad); defaults to the shipped table
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate_table: Option<PathBuf>,
    /// Atom-surface distance looked up in the rate table, nm
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distance_nm: Option<f64>,
    /// Write the closed-form time series to this CSV file
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timeseries: Option<PathBuf>,
    /// End of the time series, τ0 (default 8/Γ)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
    /// Number of time-series samples
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Write the JSON summary here instead of stdout
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<PathBuf>,
    /// Include wall-clock time in the summary
    #[arg(long, num_args = 0, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<bool>,
    #[arg(skip)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometryMetadata>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct EvolveParams {
    /// Solver backend
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver: Option<Solver>,
    /// Number of atoms
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Initial state
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init: Option<Init>,
    /// Product-state polar angle, radians; 0 is full excitation
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    /// Product-state relative phase, radians
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    /// Guided-mode decay rate, units of γ0
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_guided: Option<f64>,
    /// Radiation-mode decay rate, units of γ0
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_rad: Option<f64>,
    /// Rate table CSV; defaults to the shipped table
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate_table: Option<PathBuf>,
    /// Atom-surface distance looked up in the rate table, nm
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distance_nm: Option<f64>,
    /// Full coupling matrix as a headerless CSV (exact solver only); replaces the ideal string
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coupling_matrix: Option<PathBuf>,
    /// Guided part of the coupling matrix, used to split the emitted intensity
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub guided_matrix: Option<PathBuf>,
    /// Relative step tolerance
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    /// Absolute step tolerance
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abs_tol: Option<f64>,
    /// Largest allowed step, τ0
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_step: Option<f64>,
    /// End time, τ0 (default 8/Γ)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
    /// Number of output samples
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Largest atom count the exact solver accepts
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub atom_cap: Option<usize>,
    /// Trajectory CSV path (stdout if omitted)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Keep every k-th row of the trajectory CSV (the last row is always kept)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub downsample: Option<usize>,
    /// Write the JSON summary here (default: stdout, or stderr when the CSV goes to stdout)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<PathBuf>,
    /// Include wall-clock time in the summary
    #[arg(long, num_args = 0, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<bool>,
    #[arg(skip)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometryMetadata>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SweepParams {
    /// Closed form to sweep
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    /// First atom number
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_min: Option<usize>,
    /// Last atom number (inclusive)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    /// Product-state polar angle (meanfield mode), radians
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    /// Guided-mode decay rate, units of γ0
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_guided: Option<f64>,
    /// Radiation-mode decay rate, units of γ0
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_rad: Option<f64>,
    /// Rate table CSV; defaults to the shipped table
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate_table: Option<PathBuf>,
    /// Atom-surface distance looked up in the rate table, nm
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distance_nm: Option<f64>,
    /// Sweep CSV path (stdout if omitted)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Write the JSON summary here (default: stdout, or stderr when the CSV goes to stdout)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<PathBuf>,
    /// Include wall-clock time in the summary
    #[arg(long, num_args = 0, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<bool>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct LengthParams {
    /// Number of atoms
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Natural linewidth γ0/2π, MHz
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub linewidth_mhz: Option<f64>,
    /// Guided-mode decay rate, units of γ0
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_guided: Option<f64>,
    /// Radiation-mode decay rate, units of γ0
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_rad: Option<f64>,
    /// Rate table CSV; defaults to the shipped table
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate_table: Option<PathBuf>,
    /// Atom-surface distance looked up in the rate table, nm
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distance_nm: Option<f64>,
    /// Write the JSON summary here instead of stdout
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<PathBuf>,
    /// Include wall-clock time in the summary
    #[arg(long, num_args = 0, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<bool>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FigureParams {
    /// Figure preset
    #[arg(value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    /// Rate table CSV; defaults to the shipped table
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate_table: Option<PathBuf>,
    /// Directory receiving the figure CSV files
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Write the JSON summary here instead of stdout
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<PathBuf>,
    /// Include wall-clock time in the summary
    #[arg(long, num_args = 0, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<bool>,
}

/// Reads a flat TOML (`.toml`) or JSON (anything else) config table.
pub fn load_config_file(path: &Path) -> Result<Map<String, Value>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let value: Value = if path.extension().is_some_and(|e| e == "toml") {
        let table: toml::Table = toml::from_str(&text)
            .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        serde_json::to_value(table).map_err(|e| CliError::usage(e.to_string()))?
    } else {
        serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?
    };
    match value {
        Value::Object(map) => Ok(map),
        _ => Err(CliError::usage(format!("{}: config must be a table of keys", path.display()))),
    }
}

/// File values overlaid with command-line values.
pub fn resolve<P: Serialize + DeserializeOwned>(flags: &P, config: Option<&Path>) -> Result<P, CliError> {
    let Some(path) = config else {
        return Ok(serde_json::from_value(serde_json::to_value(flags).expect("params serialize"))
            .expect("flag values round-trip"));
    };
    let mut merged = load_config_file(path)?;
    if let Value::Object(given) = serde_json::to_value(flags).expect("params serialize") {
        merged.extend(given);
    }
    serde_json::from_value(Value::Object(merged))
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

pub fn require<T>(value: Option<T>, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::usage(format!("missing required parameter --{flag}")))
}
