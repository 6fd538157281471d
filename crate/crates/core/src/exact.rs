//! Brute-force master-equation integration on the full 2^N-dimensional atomic space.
//!
//! Basis index bit `j` set means atom `j` is excited. Lowering and raising operators act by
//! bit manipulation on row and column indices; no 2^N × 2^N operator matrix is ever stored.

use std::cell::RefCell;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::coupling::{CouplingMatrix, DecayChannel};
use crate::error::{Error, Result};
use crate::integrate::{integrate, IntegratorConfig, OdeSystem};
use crate::state::InitialStateSpec;
use crate::trajectory::Trajectory;

pub const DEFAULT_ATOM_CAP: usize = 10;

/// Trace drift tolerated along a trajectory before the run is rejected.
pub const TRACE_DRIFT_TOL: f64 = 1e-6;
/// Most negative eigenvalue tolerated in the final state.
pub const POSITIVITY_TOL: f64 = 1e-6;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Bytes needed for one complex 2^N × 2^N matrix.
pub fn density_matrix_bytes(n: usize) -> u128 {
    16u128 << (2 * n)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_atoms: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn from_entries(n_atoms: usize, data: Vec<Complex64>) -> Result<Self> {
        let dim = 1usize << n_atoms;
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: data.len(),
            });
        }
        Ok(Self { n_atoms, data })
    }

    /// |ψ⟩⟨ψ| for a state vector of length 2^n.
    pub fn from_pure(n_atoms: usize, psi: &[Complex64]) -> Result<Self> {
        let dim = 1usize << n_atoms;
        if psi.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: psi.len(),
            });
        }
        let mut data = vec![ZERO; dim * dim];
        for (r, a) in psi.iter().enumerate() {
            for (c, b) in psi.iter().enumerate() {
                data[r * dim + c] = a * b.conj();
            }
        }
        Ok(Self { n_atoms, data })
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn dim(&self) -> usize {
        1 << self.n_atoms
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.dim() + c]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    pub fn max_hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for r in 0..d {
            for c in r..d {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    fn to_matrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.dim(), self.dim(), &self.data)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.to_matrix().symmetric_eigenvalues().min()
    }

    /// True when every eigenvalue exceeds `-tol`; one Cholesky factorisation of ρ + tol·1.
    pub fn is_positive_within(&self, tol: f64) -> bool {
        let mut m = self.to_matrix();
        for i in 0..self.dim() {
            m[(i, i)] += Complex64::new(tol, 0.0);
        }
        m.cholesky().is_some()
    }

    pub fn population(&self) -> f64 {
        let d = self.dim();
        (0..d)
            .map(|x| x.count_ones() as f64 * self.data[x * d + x].re)
            .sum()
    }

    /// ⟨σ_i†σ_j⟩ as a row-major N × N matrix.
    pub fn correlations(&self) -> Vec<Complex64> {
        correlations(self.n_atoms, &self.data)
    }

    /// ⟨J+J−⟩ = Σ_ij ⟨σ_i†σ_j⟩.
    pub fn jpjm(&self) -> f64 {
        self.correlations().iter().map(|c| c.re).sum()
    }
}

fn correlations(n: usize, rho: &[Complex64]) -> Vec<Complex64> {
    let dim = 1usize << n;
    let mut out = vec![ZERO; n * n];
    for j in 0..n {
        let bj = 1usize << j;
        for i in 0..n {
            let bi = 1usize << i;
            let mut acc = ZERO;
            for y in 0..dim {
                if y & bj == 0 {
                    continue;
                }
                let lowered = y ^ bj;
                if lowered & bi != 0 {
                    continue;
                }
                acc += rho[y * dim + (lowered | bi)];
            }
            out[i * n + j] = acc;
        }
    }
    out
}

/// Initial density matrix in the computational basis, refusing sizes above `cap`.
pub fn build_density_matrix_capped(
    spec: &InitialStateSpec,
    n: usize,
    cap: usize,
) -> Result<DensityMatrix> {
    spec.validate()?;
    if n < 1 {
        return Err(Error::InvalidAtomCount(n));
    }
    if n > cap {
        return Err(Error::AtomCountExceedsCap {
            n,
            cap,
            bytes: density_matrix_bytes(n),
        });
    }
    let dim = 1usize << n;
    let mut psi = vec![ZERO; dim];
    match *spec {
        InitialStateSpec::SymmetricOneExcitation => {
            let amp = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
            for j in 0..n {
                psi[1 << j] = amp;
            }
        }
        InitialStateSpec::Product { theta, phi } => {
            let (e, g) = InitialStateSpec::single_atom_amplitudes(theta, phi);
            for (x, amp) in psi.iter_mut().enumerate() {
                let k = x.count_ones() as i32;
                *amp = e.powi(k) * g.powi(n as i32 - k);
            }
        }
    }
    DensityMatrix::from_pure(n, &psi)
}

pub fn build_density_matrix(spec: &InitialStateSpec, n: usize) -> Result<DensityMatrix> {
    build_density_matrix_capped(spec, n, DEFAULT_ATOM_CAP)
}

enum Plan {
    /// γ_guided·D[J−] + γ_rad·Σ_j D[σ_j].
    IdealString { guided: f64, rad: f64 },
    /// Σ_k λ_k D[Σ_j v_kj σ_j].
    Channels(Vec<DecayChannel>),
}

/// Master-equation generator for a fixed coupling matrix, applied matrix-free.
pub struct ExactLiouvillian {
    n: usize,
    plan: Plan,
    total: Vec<f64>,
    guided: Vec<f64>,
    scratch: RefCell<(Vec<Complex64>, Vec<Complex64>)>,
}

impl ExactLiouvillian {
    pub fn new(coupling: &CouplingMatrix) -> Self {
        let n = coupling.n();
        let plan = match coupling.ideal_rates() {
            Some(r) => Plan::IdealString {
                guided: r.gamma_guided(),
                rad: r.gamma_rad(),
            },
            None => Plan::Channels(coupling.decay_channels()),
        };
        let guided = (0..n * n)
            .map(|k| coupling.guided_entry(k / n, k % n))
            .collect();
        Self {
            n,
            plan,
            total: coupling.entries().to_vec(),
            guided,
            scratch: RefCell::new((Vec::new(), Vec::new())),
        }
    }

    pub fn n_atoms(&self) -> usize {
        self.n
    }

    /// dρ/dt into `out` (overwritten).
    pub fn apply(&self, rho: &[Complex64], out: &mut [Complex64]) {
        out.iter_mut().for_each(|o| *o = ZERO);
        let dim = 1usize << self.n;
        let mut scratch = self.scratch.borrow_mut();
        let (x, z) = &mut *scratch;
        x.resize(dim * dim, ZERO);
        z.resize(dim * dim, ZERO);
        match &self.plan {
            Plan::IdealString { guided, rad } => {
                if *guided != 0.0 {
                    let ones = vec![1.0; self.n];
                    add_dissipator(self.n, &ones, *guided, rho, out, x, z);
                }
                if *rad != 0.0 {
                    add_local_decay(self.n, *rad, rho, out);
                }
            }
            Plan::Channels(channels) => {
                for ch in channels {
                    add_dissipator(self.n, &ch.weights, ch.rate, rho, out, x, z);
                }
            }
        }
    }
}

fn axpy(dst: &mut [Complex64], w: f64, src: &[Complex64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s * w;
    }
}

/// dst[c] += w·src[c | b] for every c without bit b.
fn add_raised(dst: &mut [Complex64], w: f64, src: &[Complex64], b: usize) {
    for base in (0..dst.len()).step_by(2 * b) {
        axpy(&mut dst[base..base + b], w, &src[base + b..base + 2 * b]);
    }
}

/// dst[c] += w·src[c ^ b] for every c with bit b.
fn add_lowered(dst: &mut [Complex64], w: f64, src: &[Complex64], b: usize) {
    for base in (0..dst.len()).step_by(2 * b) {
        axpy(&mut dst[base + b..base + 2 * b], w, &src[base..base + b]);
    }
}

/// out += rate·D[L]ρ with L = Σ_j w_j σ_j, via X = Lρ and Z = ρL†:
/// D[L]ρ = X L† − ½ L†X − ½ Z L.
fn add_dissipator(
    n: usize,
    w: &[f64],
    rate: f64,
    rho: &[Complex64],
    out: &mut [Complex64],
    x: &mut [Complex64],
    z: &mut [Complex64],
) {
    let dim = 1usize << n;
    for r in 0..dim {
        // X[r, ·] = Σ_{j ∉ r} w_j ρ[r | b_j, ·]
        let xr = &mut x[r * dim..(r + 1) * dim];
        xr.iter_mut().for_each(|v| *v = ZERO);
        for (j, &wj) in w.iter().enumerate() {
            let b = 1usize << j;
            if r & b == 0 && wj != 0.0 {
                axpy(xr, wj, &rho[(r | b) * dim..(r | b) * dim + dim]);
            }
        }
        // Z[r, c] = Σ_{k ∉ c} w_k ρ[r, c | b_k]
        let zr = &mut z[r * dim..(r + 1) * dim];
        zr.iter_mut().for_each(|v| *v = ZERO);
        for (k, &wk) in w.iter().enumerate() {
            if wk != 0.0 {
                add_raised(zr, wk, &rho[r * dim..(r + 1) * dim], 1 << k);
            }
        }
    }
    for r in 0..dim {
        let orow = &mut out[r * dim..(r + 1) * dim];
        for (k, &wk) in w.iter().enumerate() {
            if wk == 0.0 {
                continue;
            }
            let b = 1usize << k;
            add_raised(orow, rate * wk, &x[r * dim..(r + 1) * dim], b);
            add_lowered(orow, -0.5 * rate * wk, &z[r * dim..(r + 1) * dim], b);
            if r & b != 0 {
                axpy(orow, -0.5 * rate * wk, &x[(r ^ b) * dim..(r ^ b) * dim + dim]);
            }
        }
    }
}

/// out += rate·Σ_j D[σ_j]ρ.
fn add_local_decay(n: usize, rate: f64, rho: &[Complex64], out: &mut [Complex64]) {
    let dim = 1usize << n;
    let excitations: Vec<f64> = (0..dim).map(|c| c.count_ones() as f64).collect();
    for r in 0..dim {
        let orow = &mut out[r * dim..(r + 1) * dim];
        for j in 0..n {
            let b = 1usize << j;
            if r & b == 0 {
                add_raised(orow, rate, &rho[(r | b) * dim..(r | b) * dim + dim], b);
            }
        }
        let pr = excitations[r];
        let src = &rho[r * dim..(r + 1) * dim];
        for ((o, s), pc) in orow.iter_mut().zip(src).zip(&excitations) {
            *o -= s * (0.5 * rate * (pr + pc));
        }
    }
}

/// Right-hand side of the master equation for `rho` under `coupling`.
pub fn lindblad_derivative(rho: &DensityMatrix, coupling: &CouplingMatrix) -> Result<DensityMatrix> {
    if coupling.n() != rho.n_atoms() {
        return Err(Error::DimensionMismatch {
            expected: coupling.n(),
            got: rho.n_atoms(),
        });
    }
    let liou = ExactLiouvillian::new(coupling);
    let mut out = vec![ZERO; rho.data.len()];
    liou.apply(&rho.data, &mut out);
    DensityMatrix::from_entries(rho.n_atoms(), out)
}

/// Observable slots reported by [`ExactLiouvillian`] as an [`OdeSystem`].
pub(crate) mod slot {
    pub const TRACE: usize = 0;
    pub const POPULATION: usize = 1;
    pub const JPJM: usize = 2;
    pub const I_GUIDED: usize = 3;
    pub const I_TOTAL: usize = 4;
    pub const COUNT: usize = 5;
}

impl OdeSystem<Complex64> for ExactLiouvillian {
    fn rhs(&self, y: &[Complex64], dy: &mut [Complex64]) {
        self.apply(y, dy);
    }

    fn n_observables(&self) -> usize {
        slot::COUNT
    }

    fn observe(&self, y: &[Complex64], out: &mut [f64]) {
        let n = self.n;
        let dim = 1usize << n;
        let corr = correlations(n, y);
        out[slot::TRACE] = (0..dim).map(|i| y[i * dim + i].re).sum();
        out[slot::POPULATION] = (0..n).map(|i| corr[i * n + i].re).sum();
        out[slot::JPJM] = corr.iter().map(|c| c.re).sum();
        out[slot::I_GUIDED] = corr
            .iter()
            .zip(&self.guided)
            .map(|(c, g)| c.re * g)
            .sum();
        out[slot::I_TOTAL] = corr.iter().zip(&self.total).map(|(c, g)| c.re * g).sum();
    }
}

/// Run statistics alongside the trajectory.
#[derive(Debug, Clone)]
pub struct ExactRun {
    pub trajectory: Trajectory,
    pub final_state: DensityMatrix,
    pub max_trace_drift: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

pub fn evolve_exact_run(
    coupling: &CouplingMatrix,
    spec: &InitialStateSpec,
    config: &IntegratorConfig,
    cap: usize,
) -> Result<ExactRun> {
    config.validate()?;
    let n = coupling.n();
    let rho0 = build_density_matrix_capped(spec, n, cap)?;
    let liou = ExactLiouvillian::new(coupling);
    let times = config.sample_times();
    let sol = integrate(
        &liou,
        rho0.data,
        &times,
        config.rel_tol,
        config.abs_tol,
        config.max_step,
    )?;

    let mut max_trace_drift: f64 = 0.0;
    for (t, row) in times.iter().zip(&sol.observations) {
        let drift = (row[slot::TRACE] - 1.0).abs();
        if drift > TRACE_DRIFT_TOL {
            return Err(Error::TraceDrift { t: *t, drift });
        }
        max_trace_drift = max_trace_drift.max(drift);
    }
    let final_state = DensityMatrix::from_entries(n, sol.final_state)?;
    if !final_state.is_positive_within(POSITIVITY_TOL) {
        return Err(Error::PositivityViolation {
            min_eigenvalue: final_state.min_eigenvalue(),
        });
    }

    let col = |k: usize| -> Vec<f64> { sol.observations.iter().map(|r| r[k]).collect() };
    let (i_guided, i_rad) = match coupling.ideal_rates() {
        Some(r) => (
            col(slot::JPJM).iter().map(|x| r.gamma_guided() * x).collect(),
            col(slot::POPULATION).iter().map(|x| r.gamma_rad() * x).collect(),
        ),
        None => {
            let g = col(slot::I_GUIDED);
            let rad = col(slot::I_TOTAL).iter().zip(&g).map(|(t, g)| t - g).collect();
            (g, rad)
        }
    };
    let trajectory = Trajectory::new(
        times,
        col(slot::POPULATION),
        col(slot::JPJM),
        i_guided,
        i_rad,
    )?;
    Ok(ExactRun {
        trajectory,
        final_state,
        max_trace_drift,
        accepted_steps: sol.accepted_steps,
        rejected_steps: sol.rejected_steps,
    })
}

/// Integrates the full master equation and samples the emission observables.
pub fn evolve_exact(
    coupling: &CouplingMatrix,
    spec: &InitialStateSpec,
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    evolve_exact_run(coupling, spec, config, DEFAULT_ATOM_CAP).map(|r| r.trajectory)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::{ideal_string_matrix, load_coupling_matrix};
    use crate::rates::make_rates;
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    /// Dense σ_j (lowering) on n atoms, bit j = atom j.
    fn sigma(n: usize, j: usize) -> DMatrix<Complex64> {
        let dim = 1 << n;
        let mut m = DMatrix::zeros(dim, dim);
        for x in 0..dim {
            if x & (1 << j) != 0 {
                m[(x ^ (1 << j), x)] = c(1.0);
            }
        }
        m
    }

    /// Literal double sum ½ Σ_ij γ_ij (2σ_j ρ σ_i† − σ_i†σ_j ρ − ρ σ_i†σ_j) with dense matrices.
    fn naive_derivative(rho: &DMatrix<Complex64>, gamma: &CouplingMatrix) -> DMatrix<Complex64> {
        let n = gamma.n();
        let s: Vec<_> = (0..n).map(|j| sigma(n, j)).collect();
        let mut out = DMatrix::zeros(rho.nrows(), rho.ncols());
        for i in 0..n {
            let si_dag = s[i].adjoint();
            for j in 0..n {
                let g = c(gamma.get(i, j));
                let sdj = &si_dag * &s[j];
                let term = (&s[j] * rho * &si_dag) * c(2.0) - &sdj * rho - rho * &sdj;
                out += term * (g * 0.5);
            }
        }
        out
    }

    fn random_density(n: usize, seed: u64) -> DMatrix<Complex64> {
        let dim = 1 << n;
        let mut state = seed;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let a = DMatrix::from_fn(dim, dim, |_, _| Complex64::new(next(), next()));
        let rho = &a * a.adjoint();
        let tr = rho.trace();
        rho / tr
    }

    fn as_dm(m: &DMatrix<Complex64>, n: usize) -> DensityMatrix {
        let dim = 1 << n;
        let data = (0..dim * dim).map(|k| m[(k / dim, k % dim)]).collect();
        DensityMatrix::from_entries(n, data).unwrap()
    }

    #[test]
    fn symmetric_two_atoms() {
        let rho = build_density_matrix(&InitialStateSpec::SymmetricOneExcitation, 2).unwrap();
        for (r, cc) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
            assert!((rho.get(r, cc) - c(0.5)).norm() < 1e-15);
        }
        assert!(rho.get(0, 0).norm() == 0.0 && rho.get(3, 3).norm() == 0.0);
    }

    #[test]
    fn product_states() {
        let rho = build_density_matrix(&InitialStateSpec::product(0.0, 0.0).unwrap(), 3).unwrap();
        assert!((rho.get(7, 7) - c(1.0)).norm() < 1e-15);
        assert!((rho.trace() - c(1.0)).norm() < 1e-15);
        let rho = build_density_matrix(&InitialStateSpec::product(PI / 2.0, 0.0).unwrap(), 1).unwrap();
        for k in 0..4 {
            assert!((rho.entries()[k] - c(0.5)).norm() < 1e-15);
        }
    }

    #[test]
    fn cap_is_enforced() {
        let err = build_density_matrix(&InitialStateSpec::SymmetricOneExcitation, 20).unwrap_err();
        assert_eq!(
            err,
            Error::AtomCountExceedsCap {
                n: 20,
                cap: 10,
                bytes: 16 << 40
            }
        );
    }

    #[test]
    fn single_atom_decay() {
        let g = load_coupling_matrix(&[vec![1.0]]).unwrap();
        let excited = DensityMatrix::from_entries(1, vec![c(0.0), c(0.0), c(0.0), c(1.0)]).unwrap();
        let d = lindblad_derivative(&excited, &g).unwrap();
        assert!((d.get(1, 1) - c(-1.0)).norm() < 1e-15);
        assert!((d.get(0, 0) - c(1.0)).norm() < 1e-15);
        let ground = DensityMatrix::from_entries(1, vec![c(1.0), c(0.0), c(0.0), c(0.0)]).unwrap();
        let d = lindblad_derivative(&ground, &g).unwrap();
        assert!(d.entries().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn symmetric_state_decays_at_collective_rate() {
        let gamma = ideal_string_matrix(2, make_rates(0.26, 1.06).unwrap()).unwrap();
        let rho = build_density_matrix(&InitialStateSpec::SymmetricOneExcitation, 2).unwrap();
        let d = lindblad_derivative(&rho, &gamma).unwrap();
        // ⟨1|ρ̇|1⟩ with |1⟩ = (|01⟩ + |10⟩)/√2
        let proj: Complex64 = [(1, 1), (1, 2), (2, 1), (2, 2)]
            .iter()
            .map(|&(r, cc)| d.get(r, cc) * 0.5)
            .sum();
        assert!((proj.re + 1.58).abs() < 1e-14, "{proj}");
    }

    #[test]
    fn dimension_mismatch() {
        let gamma = ideal_string_matrix(3, make_rates(0.26, 1.06).unwrap()).unwrap();
        let rho = build_density_matrix(&InitialStateSpec::SymmetricOneExcitation, 2).unwrap();
        assert!(matches!(
            lindblad_derivative(&rho, &gamma),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn split_matches_naive_double_sum() {
        let rates = make_rates(0.26, 1.06).unwrap();
        for n in 1..=4 {
            let gamma = ideal_string_matrix(n, rates).unwrap();
            for seed in 0..3 {
                let rho = random_density(n, 17 * n as u64 + seed);
                let want = naive_derivative(&rho, &gamma);
                let got = lindblad_derivative(&as_dm(&rho, n), &gamma).unwrap();
                let dim = 1 << n;
                for r in 0..dim {
                    for cc in 0..dim {
                        assert!((got.get(r, cc) - want[(r, cc)]).norm() < 1e-12, "n={n}");
                    }
                }
            }
        }
    }

    #[test]
    fn general_matrix_matches_naive_double_sum() {
        let gamma = load_coupling_matrix(&[
            vec![1.3, 0.2, -0.1],
            vec![0.2, 1.0, 0.4],
            vec![-0.1, 0.4, 0.9],
        ])
        .unwrap();
        let rho = random_density(3, 99);
        let want = naive_derivative(&rho, &gamma);
        let got = lindblad_derivative(&as_dm(&rho, 3), &gamma).unwrap();
        for r in 0..8 {
            for cc in 0..8 {
                assert!((got.get(r, cc) - want[(r, cc)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn observables_of_product_state() {
        let n = 4;
        let spec = InitialStateSpec::product(PI / 2.0, 1.0).unwrap();
        let rho = build_density_matrix(&spec, n).unwrap();
        assert!((rho.population() - 2.0).abs() < 1e-13);
        // n + n(n−1)/4
        assert!((rho.jpjm() - 5.0).abs() < 1e-13);
        assert!(rho.max_hermiticity_error() < 1e-15);
        assert!(rho.is_positive_within(1e-12));
    }
}
