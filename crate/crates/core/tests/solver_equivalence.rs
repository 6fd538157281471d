//! Permutation-invariant and full density-matrix solvers on identical problems.

use std::f64::consts::PI;

use fibersr::dicke::{evolve_dicke_run, Multiplicity};
use fibersr::exact::{evolve_exact_run, DEFAULT_ATOM_CAP};
use fibersr::integrate::integrate;
use fibersr::{
    collective_rate, enumerate_blocks, evolve_dicke, evolve_dicke_coupling, ideal_string_matrix,
    load_coupling_matrix, make_rates, DecayRates, Error, InitialStateSpec, IntegratorConfig,
};
use fibersr::dicke::{encode_initial, DickeLiouvillian, DickeState};

fn specs() -> Vec<InitialStateSpec> {
    vec![
        InitialStateSpec::SymmetricOneExcitation,
        InitialStateSpec::product(0.0, 0.0).unwrap(),
        InitialStateSpec::product(PI / 2.0, 0.0).unwrap(),
        InitialStateSpec::product(2.0, 1.3).unwrap(),
    ]
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn dicke_matches_exact_for_small_strings() {
    let rates = make_rates(0.26, 1.06).unwrap();
    for n in 2..=6 {
        let coupling = ideal_string_matrix(n, rates).unwrap();
        let config = IntegratorConfig::for_collective_rate(collective_rate(n, rates).unwrap()).with_samples(401);
        for spec in specs() {
            let exact = evolve_exact_run(&coupling, &spec, &config, DEFAULT_ATOM_CAP).unwrap();
            let dicke = evolve_dicke_run(rates, &spec, n, &config, Multiplicity::Folded).unwrap();
            let (e, d) = (&exact.trajectory, &dicke.trajectory);
            assert_eq!(e.times(), d.times());
            for (label, x, y) in [
                ("P", e.population(), d.population()),
                ("i_guided", e.i_guided(), d.i_guided()),
                ("i_rad", e.i_rad(), d.i_rad()),
            ] {
                let diff = max_abs_diff(x, y);
                assert!(diff < 1e-7, "n={n} {spec:?} {label}: {diff}");
            }
        }
    }
}

#[test]
fn conventions_give_the_same_trajectory() {
    let rates = make_rates(0.26, 1.06).unwrap();
    let config = IntegratorConfig::new(3.0).with_samples(301);
    let spec = InitialStateSpec::product(1.0, 0.0).unwrap();
    for n in [3, 8, 15] {
        let folded = evolve_dicke_run(rates, &spec, n, &config, Multiplicity::Folded).unwrap();
        let per_copy = evolve_dicke_run(rates, &spec, n, &config, Multiplicity::PerCopy).unwrap();
        let diff = max_abs_diff(folded.trajectory.population(), per_copy.trajectory.population());
        assert!(diff < 1e-7, "n={n}: {diff}");
    }
}

#[test]
fn weighted_trace_is_preserved() {
    let rates = make_rates(0.26, 1.06).unwrap();
    for n in [5, 20, 60] {
        let config = IntegratorConfig::for_collective_rate(collective_rate(n, rates).unwrap());
        for spec in specs() {
            let run = evolve_dicke_run(rates, &spec, n, &config, Multiplicity::Folded).unwrap();
            assert!(run.max_trace_drift < 1e-8, "n={n} {spec:?}: {}", run.max_trace_drift);
            assert!(run.trajectory.budget_residual().abs() < 1e-4);
        }
    }
}

#[test]
fn symmetric_state_decays_at_collective_rate() {
    let rates = make_rates(0.26, 1.06).unwrap();
    for n in [1, 2, 7, 30, 100] {
        let big_gamma = collective_rate(n, rates).unwrap();
        let config = IntegratorConfig::for_collective_rate(big_gamma);
        let traj = evolve_dicke(rates, &InitialStateSpec::SymmetricOneExcitation, n, &config).unwrap();
        for (t, p) in traj.times().iter().zip(traj.population()) {
            assert!((p - (-big_gamma * t).exp()).abs() < 1e-6, "n={n} t={t}");
        }
    }
}

#[test]
fn hundred_atom_symmetric_trajectory() {
    let rates = make_rates(0.26, 1.06).unwrap();
    let config = IntegratorConfig::for_collective_rate(27.06);
    let traj = evolve_dicke(rates, &InitialStateSpec::SymmetricOneExcitation, 100, &config).unwrap();
    for (t, p) in traj.times().iter().zip(traj.population()) {
        assert!((p - (-27.06 * t).exp()).abs() < 1e-6);
    }
    let e = traj.energies();
    assert!((e.f_guided - 0.9608).abs() < 1e-3, "{}", e.f_guided);
    assert!(traj.budget_residual().abs() < 1e-4);
}

#[test]
fn single_atom_guided_fraction() {
    let rates = make_rates(0.26, 1.06).unwrap();
    let coupling = ideal_string_matrix(1, rates).unwrap();
    let config = IntegratorConfig::new(20.0);
    let spec = InitialStateSpec::product(0.0, 0.0).unwrap();
    let run = evolve_exact_run(&coupling, &spec, &config, DEFAULT_ATOM_CAP).unwrap();
    assert!((run.trajectory.energies().f_guided - 0.26 / 1.32).abs() < 1e-3);
}

#[test]
fn pure_collective_decay_stays_in_top_block() {
    let rates = DecayRates::allowing_zero_radiation(1.0, 0.0).unwrap();
    for n in [4, 9, 40] {
        let space = enumerate_blocks(n).unwrap();
        let liou = DickeLiouvillian::new(&space, rates, Multiplicity::Folded);
        for spec in specs() {
            let rho0: DickeState = encode_initial(&spec, &space).unwrap();
            for t_final in [0.05, 0.5, 3.0] {
                let sol = integrate(&liou, rho0.entries().to_vec(), &[0.0, t_final], 1e-8, 1e-10, t_final).unwrap();
                let mut state = DickeState::zeros(space.clone(), Multiplicity::Folded);
                state.entries_mut().copy_from_slice(&sol.final_state);
                assert!(state.lower_block_norm() < 1e-12, "n={n} t={t_final}");
            }
        }
    }
}

#[test]
fn non_ideal_coupling_is_refused() {
    let m = load_coupling_matrix(&[vec![1.0, 0.2], vec![0.2, 1.0]]).unwrap();
    let config = IntegratorConfig::new(1.0);
    let err = evolve_dicke_coupling(&m, &InitialStateSpec::SymmetricOneExcitation, &config).unwrap_err();
    assert_eq!(err, Error::NonPermutationInvariantCoupling);
}
