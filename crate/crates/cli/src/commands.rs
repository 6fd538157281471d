use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};
use std::time::Instant;

use fibersr::analytics::{meanfield_initial_intensity, MeanFieldParams};
use fibersr::dicke::{evolve_dicke_run, Multiplicity};
use fibersr::exact::{density_matrix_bytes, evolve_exact_run, DEFAULT_ATOM_CAP};
use fibersr::units::CS_D2_LINEWIDTH_MHZ;
use fibersr::{
    collective_rate, cooperativity_length, ideal_string_matrix, load_coupling_matrix, make_rates,
    meanfield_fraction, meanfield_intensity, meanfield_params, meanfield_peak, meanfield_population,
    symmetric_fraction, CouplingMatrix, DecayRates, GeometryMetadata, InitialStateSpec,
    IntegratorConfig, RateTable, Trajectory,
};
use serde::Serialize;

use crate::config::{
    require, AnalyticParams, EvolveParams, FigureParams, Init, LengthParams, Mode, Preset,
    Solver, SweepParams,
};
use crate::error::CliError;
use crate::output::{write_summary, write_sweep, write_trajectory, Sink, Summary};

const DEFAULT_SAMPLES: usize = 2001;

/// Collects warnings for the summary and echoes them to stderr as they occur.
#[derive(Default)]
struct Warnings(Vec<String>);

impl Warnings {
    fn push(&mut self, msg: String) {
        eprintln!("warning: {msg}");
        self.0.push(msg);
    }
}

fn echo<P: Serialize>(params: &P) -> serde_json::Value {
    serde_json::to_value(params).expect("params serialize")
}

fn load_table(path: Option<&Path>) -> Result<RateTable, CliError> {
    match path {
        None => Ok(RateTable::shipped()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            Ok(RateTable::from_csv_str(&text)?)
        }
    }
}

fn resolve_rates(
    gamma_guided: Option<f64>,
    gamma_rad: Option<f64>,
    table: Option<&Path>,
    distance_nm: Option<f64>,
    warnings: &mut Warnings,
) -> Result<DecayRates, CliError> {
    match (gamma_guided, gamma_rad, distance_nm) {
        (Some(g), Some(r), distance) => {
            if distance.is_some() || table.is_some() {
                warnings.push("direct --gamma-guided/--gamma-rad override the rate table lookup".into());
            }
            Ok(make_rates(g, r)?)
        }
        (Some(_), None, _) | (None, Some(_), _) => Err(CliError::usage(
            "--gamma-guided and --gamma-rad must be given together",
        )),
        (None, None, Some(d)) => Ok(load_table(table)?.lookup(d)?),
        (None, None, None) => Err(CliError::usage(
            "decay rates required: give --gamma-guided and --gamma-rad, or --distance-nm",
        )),
    }
}

fn product_spec(theta: Option<f64>, phi: Option<f64>) -> Result<InitialStateSpec, CliError> {
    Ok(InitialStateSpec::product(theta.unwrap_or(0.0), phi.unwrap_or(0.0))?)
}

/// The closed-form derivation assumes N ≫ N − P0 ≫ 1; "≫" is read as a factor of ten.
fn meanfield_validity(n: usize, p0: f64) -> Option<String> {
    let deficit = n as f64 - p0;
    if n as f64 >= 10.0 * deficit && deficit >= 10.0 {
        None
    } else {
        Some(format!(
            "mean-field validity condition N >> N - P0 >> 1 is not met (N = {n}, N - P0 = {deficit}); \
             closed-form results are approximate"
        ))
    }
}

fn summary_sink(summary: &Option<PathBuf>, csv_to_stdout: bool) -> Sink<'_> {
    match summary {
        Some(p) => Sink::File(p),
        None if csv_to_stdout => Sink::Stderr,
        None => Sink::Stdout,
    }
}

fn finish(mut summary: Summary, warnings: Warnings, timing: Option<bool>, started: Instant, sink: &Sink) -> Result<(), CliError> {
    summary.warnings = warnings.0;
    if timing == Some(true) {
        summary.wall_time_s = Some(started.elapsed().as_secs_f64());
    }
    write_summary(sink, &summary)
}

fn fill_rates(summary: &mut Summary, rates: DecayRates) {
    summary.gamma_guided_gamma0 = Some(rates.gamma_guided());
    summary.gamma_rad_gamma0 = Some(rates.gamma_rad());
    summary.eta = rates.eta();
}

fn fill_meanfield(summary: &mut Summary, params: &MeanFieldParams) -> Result<(), CliError> {
    summary.analytic_model = Some("meanfield");
    summary.p0 = Some(params.p0);
    summary.kappa = Some(params.kappa);
    summary.t_a_tau0 = Some(params.t_a);
    summary.t_p_tau0 = Some(params.t_p());
    summary.peak = Some(meanfield_peak(params.n, params.rates, params.p0)?.into());
    summary.f_guided_analytic = Some(meanfield_fraction(params.n, params.rates, params.p0)?);
    Ok(())
}

fn closed_form_trajectory(
    n: usize,
    rates: DecayRates,
    meanfield: Option<&MeanFieldParams>,
    config: &IntegratorConfig,
) -> Result<Trajectory, CliError> {
    let times = config.sample_times();
    let nf = n as f64;
    let (mut p, mut jpjm, mut guided) = (Vec::new(), Vec::new(), Vec::new());
    let big_gamma = collective_rate(n, rates)?;
    for &t in &times {
        match meanfield {
            None => {
                let pop = (-big_gamma * t).exp();
                p.push(pop);
                jpjm.push(nf * pop);
                guided.push(nf * rates.gamma_guided() * pop);
            }
            Some(params) => {
                let pop = meanfield_population(params, t);
                p.push(pop);
                // Factorised ⟨J+J−⟩ = P + (N − 1) P (N − P) / N.
                jpjm.push(pop + (nf - 1.0) * pop * (nf - pop) / nf);
                guided.push(if t == 0.0 {
                    meanfield_initial_intensity(params)
                } else {
                    meanfield_intensity(params, t)
                });
            }
        }
    }
    let rad = p.iter().map(|x| rates.gamma_rad() * x).collect();
    Ok(Trajectory::new(times, p, jpjm, guided, rad)?)
}

pub fn analytic(params: AnalyticParams) -> Result<(), CliError> {
    let started = Instant::now();
    let mut warnings = Warnings::default();
    let mode = require(params.mode, "mode")?;
    let n = require(params.n, "n")?;
    if let Some(g) = &params.geometry {
        g.validate()?;
    }
    let rates = resolve_rates(
        params.gamma_guided,
        params.gamma_rad,
        params.rate_table.as_deref(),
        params.distance_nm,
        &mut warnings,
    )?;
    let big_gamma = collective_rate(n, rates)?;
    let mut summary = Summary {
        command: "analytic",
        input: echo(&params),
        solver: Some("closed_form"),
        n: Some(n),
        Gamma_gamma0: Some(big_gamma),
        geometry: params.geometry.clone(),
        ..Summary::default()
    };
    fill_rates(&mut summary, rates);

    let meanfield = match mode {
        Mode::Symmetric => {
            if params.theta.is_some() {
                warnings.push("--theta is ignored in symmetric mode".into());
            }
            summary.analytic_model = Some("symmetric");
            summary.p0 = Some(1.0);
            summary.f_guided_analytic = Some(symmetric_fraction(n, rates)?);
            None
        }
        Mode::Meanfield => {
            let spec = product_spec(params.theta, None)?;
            let mf = meanfield_params(n, rates, spec.initial_population(n))?;
            fill_meanfield(&mut summary, &mf)?;
            if let Some(w) = meanfield_validity(n, mf.p0) {
                warnings.push(w);
            }
            Some(mf)
        }
    };

    if let Some(path) = &params.timeseries {
        let config = IntegratorConfig::new(params.t_final.unwrap_or(8.0 / big_gamma))
            .with_samples(params.samples.unwrap_or(DEFAULT_SAMPLES));
        config.validate()?;
        let traj = closed_form_trajectory(n, rates, meanfield.as_ref(), &config)?;
        Sink::File(path).write_with(|w| write_trajectory(w, &traj, 1))?;
        summary.t_final_tau0 = Some(config.t_final);
        summary.samples = Some(config.sample_count);
        summary.outputs.push(path.display().to_string());
    }
    let sink = summary_sink(&params.summary, false);
    finish(summary, warnings, params.timing, started, &sink)
}

fn read_matrix(path: &Path) -> Result<Vec<Vec<f64>>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(row, line)| {
            line.split(',')
                .map(|v| {
                    v.trim().parse::<f64>().map_err(|e| {
                        CliError::usage(format!("{}: row {}: {e}", path.display(), row + 1))
                    })
                })
                .collect()
        })
        .collect()
}

fn build_coupling(
    params: &EvolveParams,
    warnings: &mut Warnings,
) -> Result<(CouplingMatrix, Option<DecayRates>), CliError> {
    match &params.coupling_matrix {
        Some(path) => {
            if params.gamma_guided.is_some() || params.distance_nm.is_some() {
                warnings.push("--coupling-matrix replaces the ideal-string rates".into());
            }
            let mut coupling = load_coupling_matrix(&read_matrix(path)?)?;
            if let Some(g) = &params.guided_matrix {
                coupling = coupling.with_guided_part(&read_matrix(g)?)?;
            } else {
                warnings.push(
                    "no --guided-matrix given: all emission is reported in the radiation channel".into(),
                );
            }
            if let Some(n) = params.n.filter(|&n| n != coupling.n()) {
                return Err(CliError::usage(format!(
                    "--n {n} does not match the {}-atom coupling matrix",
                    coupling.n()
                )));
            }
            Ok((coupling, None))
        }
        None => {
            if params.guided_matrix.is_some() {
                return Err(CliError::usage("--guided-matrix requires --coupling-matrix"));
            }
            let n = require(params.n, "n")?;
            let rates = resolve_rates(
                params.gamma_guided,
                params.gamma_rad,
                params.rate_table.as_deref(),
                params.distance_nm,
                warnings,
            )?;
            Ok((ideal_string_matrix(n, rates)?, Some(rates)))
        }
    }
}

pub fn evolve(params: EvolveParams) -> Result<(), CliError> {
    let started = Instant::now();
    let mut warnings = Warnings::default();
    let solver = require(params.solver, "solver")?;
    let init = require(params.init, "init")?;
    if let Some(g) = &params.geometry {
        g.validate()?;
    }
    let spec = match init {
        Init::Symmetric => {
            if params.theta.is_some() || params.phi.is_some() {
                warnings.push("--theta/--phi are ignored for the symmetric initial state".into());
            }
            InitialStateSpec::SymmetricOneExcitation
        }
        Init::Product => product_spec(params.theta, params.phi)?,
    };
    let (coupling, rates) = build_coupling(&params, &mut warnings)?;
    let n = coupling.n();
    let big_gamma = match rates {
        Some(r) => collective_rate(n, r)?,
        None => coupling
            .decay_channels()
            .iter()
            .map(|c| c.rate)
            .fold(0.0, f64::max),
    };
    let mut config = IntegratorConfig::new(params.t_final.unwrap_or(8.0 / big_gamma))
        .with_samples(params.samples.unwrap_or(DEFAULT_SAMPLES));
    if params.rel_tol.is_some() || params.abs_tol.is_some() {
        config = config.with_tolerances(
            params.rel_tol.unwrap_or(config.rel_tol),
            params.abs_tol.unwrap_or(config.abs_tol),
        );
    }
    if let Some(h) = params.max_step {
        config.max_step = h;
    }
    config.validate()?;

    let mut summary = Summary {
        command: "evolve",
        input: echo(&params),
        n: Some(n),
        Gamma_gamma0: rates.map(|_| big_gamma),
        geometry: params.geometry.clone(),
        ..Summary::default()
    };
    if let Some(r) = rates {
        fill_rates(&mut summary, r);
    }

    let (traj, accepted, rejected, drift) = match solver {
        Solver::Exact => {
            let cap = params.atom_cap.unwrap_or(DEFAULT_ATOM_CAP);
            if cap > DEFAULT_ATOM_CAP && n > DEFAULT_ATOM_CAP {
                warnings.push(format!(
                    "exact solver above the default cap: the density matrix alone needs {} bytes \
                     and the integrator holds about ten copies",
                    density_matrix_bytes(n)
                ));
            }
            summary.solver = Some("exact");
            let run = evolve_exact_run(&coupling, &spec, &config, cap)?;
            (run.trajectory, run.accepted_steps, run.rejected_steps, run.max_trace_drift)
        }
        Solver::Dicke => {
            summary.solver = Some("dicke");
            let r = coupling
                .ideal_rates()
                .ok_or(fibersr::Error::NonPermutationInvariantCoupling)?;
            let run = evolve_dicke_run(r, &spec, n, &config, Multiplicity::Folded)?;
            (run.trajectory, run.accepted_steps, run.rejected_steps, run.max_trace_drift)
        }
    };

    if let Some(r) = rates {
        match spec {
            InitialStateSpec::SymmetricOneExcitation => {
                summary.analytic_model = Some("symmetric");
                summary.p0 = Some(1.0);
                summary.f_guided_analytic = Some(symmetric_fraction(n, r)?);
            }
            InitialStateSpec::Product { .. } => {
                let p0 = spec.initial_population(n);
                if p0 > 0.0 {
                    fill_meanfield(&mut summary, &meanfield_params(n, r, p0)?)?;
                } else {
                    summary.p0 = Some(p0);
                }
            }
        }
    }
    let e = traj.energies();
    summary.f_guided_numeric = Some(e.f_guided);
    summary.u_guided_hbar_omega0 = Some(e.u_guided);
    summary.u_rad_hbar_omega0 = Some(e.u_rad);
    summary.truncation_bound_hbar_omega0 = Some(e.truncation_bound);
    summary.budget_residual_hbar_omega0 = Some(traj.budget_residual());
    summary.rel_tol = Some(config.rel_tol);
    summary.abs_tol = Some(config.abs_tol);
    summary.t_final_tau0 = Some(config.t_final);
    summary.samples = Some(config.sample_count);
    summary.accepted_steps = Some(accepted);
    summary.rejected_steps = Some(rejected);
    summary.max_trace_drift = Some(drift);

    let every = params.downsample.unwrap_or(1);
    if every == 0 {
        return Err(CliError::usage("--downsample must be at least 1"));
    }
    let csv_sink = match &params.output {
        Some(p) => {
            summary.outputs.push(p.display().to_string());
            Sink::File(p)
        }
        None => Sink::Stdout,
    };
    csv_sink.write_with(|w| write_trajectory(w, &traj, every))?;
    let sink = summary_sink(&params.summary, params.output.is_none());
    finish(summary, warnings, params.timing, started, &sink)
}

fn sweep_rows(mode: Mode, n_min: usize, n_max: usize, theta: f64, rates: DecayRates) -> Result<Vec<(usize, f64)>, CliError> {
    (n_min..=n_max)
        .map(|n| {
            let f = match mode {
                Mode::Symmetric => symmetric_fraction(n, rates)?,
                Mode::Meanfield => {
                    let p0 = InitialStateSpec::product(theta, 0.0)?.initial_population(n);
                    meanfield_fraction(n, rates, p0)?
                }
            };
            Ok((n, f))
        })
        .collect()
}

pub fn sweep(params: SweepParams) -> Result<(), CliError> {
    let started = Instant::now();
    let mut warnings = Warnings::default();
    let mode = require(params.mode, "mode")?;
    let n_min = params.n_min.unwrap_or(1);
    let n_max = require(params.n_max, "n-max")?;
    if n_min < 1 || n_min > n_max {
        return Err(CliError::usage(format!("empty or invalid atom-number range {n_min}..{n_max}")));
    }
    let rates = resolve_rates(
        params.gamma_guided,
        params.gamma_rad,
        params.rate_table.as_deref(),
        params.distance_nm,
        &mut warnings,
    )?;
    let theta = params.theta.unwrap_or(0.0);
    if mode == Mode::Symmetric && params.theta.is_some() {
        warnings.push("--theta is ignored in symmetric mode".into());
    }
    let rows = sweep_rows(mode, n_min, n_max, theta, rates)?;
    if mode == Mode::Meanfield {
        let spec = InitialStateSpec::product(theta, 0.0)?;
        let outside = (n_min..=n_max)
            .filter(|&n| meanfield_validity(n, spec.initial_population(n)).is_some())
            .count();
        if outside > 0 {
            warnings.push(format!(
                "mean-field validity condition N >> N - P0 >> 1 is not met for {outside} of {} rows; \
                 closed-form results are approximate there",
                rows.len()
            ));
        }
    }

    let mut summary = Summary {
        command: "sweep",
        input: echo(&params),
        solver: Some("closed_form"),
        analytic_model: Some(match mode {
            Mode::Symmetric => "symmetric",
            Mode::Meanfield => "meanfield",
        }),
        ..Summary::default()
    };
    fill_rates(&mut summary, rates);
    let csv_sink = match &params.output {
        Some(p) => {
            summary.outputs.push(p.display().to_string());
            Sink::File(p)
        }
        None => Sink::Stdout,
    };
    csv_sink.write_with(|w| write_sweep(w, &rows))?;
    let sink = summary_sink(&params.summary, params.output.is_none());
    finish(summary, warnings, params.timing, started, &sink)
}

pub fn length(params: LengthParams) -> Result<(), CliError> {
    let started = Instant::now();
    let mut warnings = Warnings::default();
    let n = require(params.n, "n")?;
    let linewidth = params.linewidth_mhz.unwrap_or(CS_D2_LINEWIDTH_MHZ);
    let rates = resolve_rates(
        params.gamma_guided,
        params.gamma_rad,
        params.rate_table.as_deref(),
        params.distance_nm,
        &mut warnings,
    )?;
    let l0 = cooperativity_length(n, rates, linewidth)?;
    let validity = format!(
        "propagation effects are neglected: the string length L must satisfy L << L0 = {l0:.4} m"
    );
    eprintln!("{validity}");
    let mut summary = Summary {
        command: "length",
        input: echo(&params),
        n: Some(n),
        Gamma_gamma0: Some(collective_rate(n, rates)?),
        L0_m: Some(l0),
        linewidth_MHz: Some(linewidth),
        validity: Some(validity),
        ..Summary::default()
    };
    fill_rates(&mut summary, rates);
    let sink = summary_sink(&params.summary, false);
    finish(summary, warnings, params.timing, started, &sink)
}

/// Atom-surface distances plotted in the rate-dependent figures, nm.
const FIGURE_DISTANCES_NM: [f64; 3] = [0.0, 100.0, 200.0];
const FIGURE_N_MAX: usize = 100;
const FIGURE4_ATOMS: usize = 10;
const FIGURE4_DISTANCE_NM: f64 = 100.0;

pub fn figure(params: FigureParams) -> Result<(), CliError> {
    let started = Instant::now();
    let warnings = Warnings::default();
    let preset = require(params.preset, "preset")?;
    let table = load_table(params.rate_table.as_deref())?;
    let dir = params.output_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let mut summary = Summary {
        command: "figure",
        input: echo(&params),
        preset: Some(preset.name()),
        ..Summary::default()
    };

    let distances: Vec<f64> = match preset {
        Preset::Fig4a | Preset::Fig4b => vec![FIGURE4_DISTANCE_NM],
        _ => FIGURE_DISTANCES_NM.to_vec(),
    };
    let mut available = Vec::new();
    for d in distances {
        if table.contains(d) {
            available.push(d);
        } else {
            summary.skipped.push(format!(
                "r - a = {d} nm: no rates in the table; the guided and radiation rates at this distance \
                 come from fiber-mode calculations that are not part of this tool, supply them with --rate-table"
            ));
        }
    }
    if available.is_empty() {
        for s in &summary.skipped {
            eprintln!("{s}");
        }
        return Err(CliError::usage(format!(
            "preset {} refused: none of its atom-surface distances has rates in the table",
            preset.name()
        )));
    }

    for d in available {
        let rates = table.lookup(d)?;
        let tag = format!("r{d}nm");
        match preset {
            Preset::Fig3 | Preset::Fig5a | Preset::Fig5b => {
                let (mode, theta) = match preset {
                    Preset::Fig3 => (Mode::Symmetric, 0.0),
                    Preset::Fig5a => (Mode::Meanfield, 0.0),
                    _ => (Mode::Meanfield, FRAC_PI_2),
                };
                let rows = sweep_rows(mode, 1, FIGURE_N_MAX, theta, rates)?;
                let path = dir.join(format!("{}_{tag}.csv", preset.name()));
                Sink::File(&path).write_with(|w| write_sweep(w, &rows))?;
                summary.outputs.push(path.display().to_string());
            }
            Preset::Fig4a | Preset::Fig4b => {
                let theta = if preset == Preset::Fig4a { 0.0 } else { FRAC_PI_2 };
                let spec = InitialStateSpec::product(theta, 0.0)?;
                // One window for the string and the lone atom, long enough for both to decay.
                let config = IntegratorConfig::new(8.0 / rates.gamma_total()).with_samples(DEFAULT_SAMPLES);
                for n in [FIGURE4_ATOMS, 1] {
                    let coupling = ideal_string_matrix(n, rates)?;
                    let run = evolve_exact_run(&coupling, &spec, &config, DEFAULT_ATOM_CAP)?;
                    let path = dir.join(format!("{}_{tag}_n{n}.csv", preset.name()));
                    Sink::File(&path).write_with(|w| write_trajectory(w, &run.trajectory, 1))?;
                    summary.outputs.push(path.display().to_string());
                }
                summary.n = Some(FIGURE4_ATOMS);
                fill_rates(&mut summary, rates);
                let mf = meanfield_params(FIGURE4_ATOMS, rates, spec.initial_population(FIGURE4_ATOMS))?;
                fill_meanfield(&mut summary, &mf)?;
                summary.t_final_tau0 = Some(config.t_final);
                summary.samples = Some(config.sample_count);
            }
        }
    }
    summary.geometry = Some(GeometryMetadata::reference(match preset {
        Preset::Fig4a | Preset::Fig4b => FIGURE4_ATOMS,
        _ => FIGURE_N_MAX,
    }));
    for s in &summary.skipped {
        eprintln!("skipped {s}");
    }
    let sink = summary_sink(&params.summary, false);
    finish(summary, warnings, params.timing, started, &sink)
}
