//! Physical invariants of the full density-matrix solver along whole trajectories.

use std::f64::consts::PI;

use fibersr::exact::{evolve_exact_run, ExactRun, DEFAULT_ATOM_CAP};
use fibersr::{
    ideal_string_matrix, load_coupling_matrix, make_rates, CouplingMatrix, InitialStateSpec,
    IntegratorConfig, Trajectory,
};

fn anchor_string(n: usize) -> CouplingMatrix {
    ideal_string_matrix(n, make_rates(0.26, 1.06).unwrap()).unwrap()
}

/// Three atoms off the ideal spacing: guided transfer with phases cos(β z_ij).
fn detuned_string() -> CouplingMatrix {
    let (gg, gr) = (0.26, 1.06);
    let z = [0.0, 0.9, 2.3];
    let guided: Vec<Vec<f64>> = (0..3)
        .map(|i| (0..3).map(|j| gg * (2.0 * PI * (z[i] - z[j])).cos()).collect())
        .collect();
    let total: Vec<Vec<f64>> = (0..3)
        .map(|i| (0..3).map(|j| guided[i][j] + if i == j { gr } else { 0.0 }).collect())
        .collect();
    load_coupling_matrix(&total).unwrap().with_guided_part(&guided).unwrap()
}

fn cases() -> Vec<(String, CouplingMatrix, InitialStateSpec)> {
    vec![
        ("n3 symmetric".into(), anchor_string(3), InitialStateSpec::SymmetricOneExcitation),
        ("n4 full".into(), anchor_string(4), InitialStateSpec::product(0.0, 0.0).unwrap()),
        ("n4 tilted".into(), anchor_string(4), InitialStateSpec::product(1.1, 0.7).unwrap()),
        ("n5 half".into(), anchor_string(5), InitialStateSpec::product(PI / 2.0, 0.0).unwrap()),
        ("n3 detuned".into(), detuned_string(), InitialStateSpec::product(0.4, 2.0).unwrap()),
    ]
}

fn run(coupling: &CouplingMatrix, spec: &InitialStateSpec, t_final: f64, samples: usize) -> ExactRun {
    let config = IntegratorConfig::new(t_final).with_samples(samples);
    evolve_exact_run(coupling, spec, &config, DEFAULT_ATOM_CAP).unwrap()
}

fn central_difference(traj: &Trajectory) -> Vec<(usize, f64)> {
    let (t, p) = (traj.times(), traj.population());
    (1..t.len() - 1)
        .map(|k| (k, (p[k + 1] - p[k - 1]) / (t[k + 1] - t[k - 1])))
        .collect()
}

#[test]
fn trace_hermiticity_positivity() {
    for (name, coupling, spec) in cases() {
        let r = run(&coupling, &spec, 3.0, 301);
        assert!(r.max_trace_drift < 1e-8, "{name}: drift {}", r.max_trace_drift);
        assert!(r.final_state.max_hermiticity_error() < 1e-10, "{name}");
        assert!(r.final_state.min_eigenvalue() > -1e-8, "{name}");
        assert!((r.final_state.trace().re - 1.0).abs() < 1e-8, "{name}");
    }
}

#[test]
fn population_never_increases() {
    for (name, coupling, spec) in cases() {
        let r = run(&coupling, &spec, 4.0, 801);
        let p = r.trajectory.population();
        for k in 1..p.len() {
            assert!(p[k] <= p[k - 1] + 1e-9, "{name}: k={k}");
        }
        assert!(r.trajectory.i_total().iter().all(|&i| i >= -1e-9), "{name}");
    }
}

#[test]
fn population_derivative_is_total_intensity() {
    for (name, coupling, spec) in cases() {
        let r = run(&coupling, &spec, 2.0, 2001);
        let traj = &r.trajectory;
        // h = 1e-3 and |P'''| ≲ 50 puts the O(h²) error below 1e-4.
        for (k, d) in central_difference(traj) {
            let want = -traj.i_total()[k];
            assert!((d - want).abs() < 1e-4, "{name}: t={} {d} vs {want}", traj.times()[k]);
        }
    }
}

#[test]
fn population_equation_holds_for_ideal_string() {
    let (gg, gamma) = (0.26, 1.32);
    for (name, coupling, spec) in cases().into_iter().filter(|c| c.1.is_ideal_string()) {
        let r = run(&coupling, &spec, 2.0, 2001);
        let traj = &r.trajectory;
        for (k, d) in central_difference(traj) {
            let p = traj.population()[k];
            let want = -gamma * p - gg * (traj.jpjm()[k] - p);
            assert!((d - want).abs() < 1e-4, "{name}: k={k}");
        }
    }
}

#[test]
fn intensity_split_for_ideal_string() {
    let r = run(&anchor_string(4), &InitialStateSpec::product(0.8, 0.0).unwrap(), 1.0, 11);
    let traj = &r.trajectory;
    for k in 0..traj.len() {
        assert!((traj.i_guided()[k] - 0.26 * traj.jpjm()[k]).abs() < 1e-15);
        assert!((traj.i_rad()[k] - 1.06 * traj.population()[k]).abs() < 1e-15);
    }
}

#[test]
fn detuned_string_guides_less_than_ideal() {
    let spec = InitialStateSpec::product(0.0, 0.0).unwrap();
    let t_final = 12.0;
    let ideal = run(&anchor_string(3), &spec, t_final, 2001).trajectory.energies();
    let detuned = run(&detuned_string(), &spec, t_final, 2001).trajectory.energies();
    assert!(detuned.f_guided < ideal.f_guided);
    assert!(detuned.f_guided > 0.0);
}

#[test]
fn energy_budget_closes() {
    for (name, coupling, spec) in cases() {
        let r = run(&coupling, &spec, 6.0, 4001);
        let residual = r.trajectory.budget_residual();
        assert!(residual.abs() < 1e-4, "{name}: {residual}");
        let e = r.trajectory.energies();
        assert!((0.0..=1.0).contains(&e.f_guided), "{name}");
        assert!(e.u_guided + e.u_rad <= r.trajectory.population()[0], "{name}");
    }
}

#[test]
fn energy_budget_converges_with_grid() {
    // Trapezoid error is O(h²); a fine grid brings closure under 10× the integrator tolerance.
    let coupling = anchor_string(3);
    let spec = InitialStateSpec::product(0.3, 0.0).unwrap();
    let coarse = run(&coupling, &spec, 6.0, 201).trajectory.budget_residual().abs();
    let fine = run(&coupling, &spec, 6.0, 2001).trajectory.budget_residual().abs();
    let finest = run(&coupling, &spec, 6.0, 20001).trajectory.budget_residual().abs();
    assert!(fine < coarse / 50.0, "{coarse} {fine}");
    assert!(finest < 10.0 * IntegratorConfig::new(1.0).rel_tol, "{finest}");
}
