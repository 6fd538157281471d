//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::f64::consts::PI;
use std::time::Instant;

use fibersr::analytics::{meanfield_fraction_full, symmetric_fraction};
use fibersr::dicke::{evolve_dicke_run, Multiplicity};
use fibersr::exact::{evolve_exact_run, DEFAULT_ATOM_CAP};
use fibersr::trajectory::trapezoid;
use fibersr::{
    collective_rate, cooperativity_length, ideal_string_matrix, make_rates, meanfield_fraction,
    meanfield_intensity, meanfield_ode, meanfield_params, meanfield_peak, meanfield_population,
    DecayRates, InitialStateSpec, IntegratorConfig, Peak, Trajectory,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rates() -> DecayRates {
    make_rates(0.26, 1.06).unwrap()
}

/// Every trajectory produced here, for the energy-budget check.
#[derive(Default)]
struct Ledger {
    runs: Vec<(String, Trajectory)>,
}

fn channeling_fraction() -> Outcome {
    let f = symmetric_fraction(100, rates()).unwrap();
    outcome((f - 0.9608).abs() <= 0.005 && (f - 0.96).abs() <= 0.005, format!("f_guided(N=100) = {f:.6}"))
}

fn cooperativity_parameter() -> Outcome {
    let eta = rates().eta().unwrap();
    outcome((eta - 0.245).abs() <= 0.01, format!("eta = {eta:.6}"))
}

fn cooperativity_length_m() -> Outcome {
    let l0 = cooperativity_length(100, rates(), 5.3).unwrap();
    outcome((l0 - 0.33).abs() <= 0.01, format!("L0 = {l0:.5} m"))
}

fn collective_rate_law(ledger: &mut Ledger) -> Outcome {
    let mut worst: f64 = 0.0;
    for n in 1..=8 {
        let big_gamma = collective_rate(n, rates()).unwrap();
        let coupling = ideal_string_matrix(n, rates()).unwrap();
        let config = IntegratorConfig::for_collective_rate(big_gamma);
        let run = evolve_exact_run(&coupling, &InitialStateSpec::SymmetricOneExcitation, &config, DEFAULT_ATOM_CAP)
            .unwrap();
        let traj = run.trajectory;
        for (t, p) in traj.times().iter().zip(traj.population()) {
            let want = (-big_gamma * t).exp();
            worst = worst.max((p - want).abs() / want);
        }
        ledger.runs.push((format!("exact symmetric n={n}"), traj));
    }
    outcome(worst < 1e-6, format!("max relative deviation from exp(-Gamma t) over n=1..8: {worst:.3e}"))
}

fn oracle_equivalence(ledger: &mut Ledger) -> Outcome {
    let specs = [
        InitialStateSpec::SymmetricOneExcitation,
        InitialStateSpec::product(0.0, 0.0).unwrap(),
        InitialStateSpec::product(PI / 2.0, 0.0).unwrap(),
    ];
    let (mut dp, mut dg): (f64, f64) = (0.0, 0.0);
    for n in 2..=6 {
        let coupling = ideal_string_matrix(n, rates()).unwrap();
        let config = IntegratorConfig::for_collective_rate(collective_rate(n, rates()).unwrap());
        for spec in &specs {
            let e = evolve_exact_run(&coupling, spec, &config, DEFAULT_ATOM_CAP).unwrap().trajectory;
            let d = evolve_dicke_run(rates(), spec, n, &config, Multiplicity::Folded)
                .unwrap()
                .trajectory;
            for k in 0..e.len() {
                dp = dp.max((e.population()[k] - d.population()[k]).abs());
                dg = dg.max((e.i_guided()[k] - d.i_guided()[k]).abs());
            }
            ledger.runs.push((format!("exact n={n} {spec:?}"), e));
            ledger.runs.push((format!("dicke n={n} {spec:?}"), d));
        }
    }
    outcome(dp < 1e-7 && dg < 1e-7, format!("max |dP| = {dp:.3e}, max |d i_guided| = {dg:.3e}"))
}

const MEANFIELD_SETS: [(usize, f64); 3] = [(10, 10.0), (10, 5.0), (100, 100.0)];

fn meanfield_vs_ode() -> Outcome {
    let mut worst: f64 = 0.0;
    for (n, p0) in MEANFIELD_SETS {
        let params = meanfield_params(n, rates(), p0).unwrap();
        let grid: Vec<f64> = (0..=2000).map(|k| k as f64 * 20.0 * params.tau / 2000.0).collect();
        let ode = meanfield_ode(n, rates(), p0, &grid).unwrap();
        for (t, p) in grid.iter().zip(&ode) {
            worst = worst.max((p - meanfield_population(&params, *t)).abs());
        }
    }
    outcome(worst < 1e-9, format!("max |dP| closed form vs ODE: {worst:.3e}"))
}

fn intensity_fraction_tie() -> Outcome {
    let mut worst: f64 = 0.0;
    for (n, p0) in MEANFIELD_SETS {
        let params = meanfield_params(n, rates(), p0).unwrap();
        let samples = 400_001;
        let grid: Vec<f64> = (0..samples)
            .map(|k| k as f64 * 40.0 * params.tau / (samples - 1) as f64)
            .collect();
        let intensity: Vec<f64> = grid.iter().map(|t| meanfield_intensity(&params, *t)).collect();
        let u = trapezoid(&grid, &intensity);
        let want = p0 * meanfield_fraction(n, rates(), p0).unwrap();
        worst = worst.max((u - want).abs() / want);
    }
    outcome(worst < 1e-4, format!("max relative gap between integrated intensity and p0*f: {worst:.3e}"))
}

fn emission_morphology(ledger: &mut Ledger) -> Outcome {
    let n = 10;
    let coupling = ideal_string_matrix(n, rates()).unwrap();
    let config = IntegratorConfig::for_collective_rate(collective_rate(n, rates()).unwrap());
    let started = Instant::now();
    let run = evolve_exact_run(&coupling, &InitialStateSpec::product(0.0, 0.0).unwrap(), &config, DEFAULT_ATOM_CAP)
        .unwrap();
    let elapsed = started.elapsed().as_secs_f64();
    let traj = run.trajectory;
    let ig = traj.i_guided();
    let (k_max, i_max) = ig
        .iter()
        .enumerate()
        .fold((0, f64::MIN), |acc, (k, &v)| if v > acc.1 { (k, v) } else { acc });
    let t_max = traj.times()[k_max];
    let is_local_peak = k_max > 0 && k_max + 1 < ig.len() && i_max > ig[0];
    let initial = ig[0] / n as f64;
    let p0_half = InitialStateSpec::product(PI / 2.0, 0.0).unwrap().initial_population(n);
    let half = meanfield_peak(n, rates(), p0_half).unwrap();
    let pass = is_local_peak && (initial - 0.26).abs() <= 1e-6 && half == Peak::MonotonicDecrease;
    let detail = format!(
        "exact N=10 theta=0: peak {i_max:.5} I0 at t = {t_max:.5} tau0 (i(0) = {:.5}), i(0)/N = {initial:.9}, \
         {} steps in {elapsed:.1} s; mean-field theta=pi/2: {half:?}",
        ig[0], run.accepted_steps
    );
    ledger.runs.push(("exact n=10 theta=0".into(), traj));
    outcome(pass, detail)
}

fn energy_budget(ledger: &Ledger) -> Outcome {
    let (name, worst) = ledger
        .runs
        .iter()
        .map(|(name, t)| (name.as_str(), t.budget_residual().abs()))
        .fold(("", 0.0f64), |acc, x| if x.1 > acc.1 { x } else { acc });
    outcome(
        worst < 1e-4,
        format!("{} trajectories, worst |budget residual| = {worst:.3e} ({name})", ledger.runs.len()),
    )
}

fn fraction_monotonicity() -> Outcome {
    let sym: Vec<f64> = (1..=200).map(|n| symmetric_fraction(n, rates()).unwrap()).collect();
    let mf: Vec<f64> = (1..=200).map(|n| meanfield_fraction_full(n, rates()).unwrap()).collect();
    let increasing = |v: &[f64]| v.windows(2).all(|w| w[1] > w[0]) && v.iter().all(|&f| f < 1.0);
    let sym_far = symmetric_fraction(1_000_000, rates()).unwrap();
    let mf_far = meanfield_fraction_full(1_000_000, rates()).unwrap();
    outcome(
        increasing(&sym) && increasing(&mf) && sym_far > 0.9999 && mf_far > 0.9999,
        format!("strictly increasing on 1..200; f(1e6): symmetric {sym_far:.7}, mean-field {mf_far:.7}"),
    )
}

fn main() {
    let mut ledger = Ledger::default();
    let mut results: Vec<(&str, Outcome)> = vec![
        ("1 channeling fraction", channeling_fraction()),
        ("2 cooperativity parameter", cooperativity_parameter()),
        ("3 cooperativity length", cooperativity_length_m()),
    ];
    results.push(("4 collective rate law", collective_rate_law(&mut ledger)));
    results.push(("5 oracle equivalence", oracle_equivalence(&mut ledger)));
    results.push(("6 mean-field closed form vs ODE", meanfield_vs_ode()));
    results.push(("7 intensity integral vs fraction", intensity_fraction_tie()));
    results.push(("8 emission morphology", emission_morphology(&mut ledger)));
    results.push(("9 energy budget", energy_budget(&ledger)));
    results.push(("10 fraction monotonicity", fraction_monotonicity()));

    let mut failed = 0;
    for (name, o) in &results {
        println!("criterion {name}: {} : {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
