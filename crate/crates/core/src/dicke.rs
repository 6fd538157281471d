//! Permutation-invariant integration in the Dicke block basis.
//!
//! The N-atom space splits into total-spin sectors j = N/2, N/2 − 1, …, each appearing with
//! multiplicity d_N(j). A permutation-invariant density matrix is ⊕_j ρ_j ⊗ 1_{d_N(j)}, so one
//! (2j+1) × (2j+1) block per j carries the whole state: O(N³) numbers instead of 4^N.
//!
//! Spin quantum numbers are stored doubled (`twice_j`, `twice_m`) so half-integers stay exact.
//!
//! Collective decay D[J−] acts inside each block. Independent decay Σ_i D[σ_i] moves weight
//! from block j to j − 1, j, j + 1; its coefficients are Clebsch–Gordan products for a rank-1
//! lowering tensor times one constant per (j → j') pair, fixed by trace preservation.

use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::coupling::CouplingMatrix;
use crate::error::{Error, Result};
use crate::integrate::{integrate, IntegratorConfig, OdeSystem};
use crate::rates::DecayRates;
use crate::state::InitialStateSpec;
use crate::trajectory::Trajectory;

pub const MAX_ATOMS: usize = 500;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// How the multiplicity d_N(j) enters the stored blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Multiplicity {
    /// Block j holds d_N(j)·ρ_j, the total weight of the sector. Trace = Σ_j tr(block_j).
    Folded,
    /// Block j holds ρ_j, the state of one copy. Trace = Σ_j d_N(j)·tr(block_j).
    PerCopy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DickeBlock {
    pub twice_j: usize,
    pub multiplicity: BigUint,
    /// Offset of the block's first element in the flat state vector.
    pub offset: usize,
}

impl DickeBlock {
    pub fn j(&self) -> f64 {
        self.twice_j as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.twice_j + 1
    }

    pub fn multiplicity_f64(&self) -> f64 {
        self.multiplicity.to_f64().unwrap_or(f64::INFINITY)
    }

    /// m for in-block index k (k = 0 ↔ m = −j).
    pub fn m(&self, k: usize) -> f64 {
        k as f64 - self.j()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DickeSpace {
    n_atoms: usize,
    blocks: Vec<DickeBlock>,
    element_count: usize,
}

fn binomial(n: usize, k: usize) -> BigUint {
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Sectors j = N/2, N/2 − 1, … ≥ 0 with d_N(j) = C(N, N/2 − j) − C(N, N/2 − j − 1).
pub fn enumerate_blocks(n: usize) -> Result<DickeSpace> {
    if !(1..=MAX_ATOMS).contains(&n) {
        return Err(Error::AtomCountOutOfRange { n, max: MAX_ATOMS });
    }
    let mut blocks = Vec::new();
    let mut offset = 0;
    let mut twice_j = n;
    loop {
        let k = (n - twice_j) / 2;
        let upper = binomial(n, k);
        let lower = if k == 0 { BigUint::from(0u8) } else { binomial(n, k - 1) };
        let multiplicity = upper - lower;
        let dim = twice_j + 1;
        blocks.push(DickeBlock {
            twice_j,
            multiplicity,
            offset,
        });
        offset += dim * dim;
        if twice_j < 2 {
            break;
        }
        twice_j -= 2;
    }
    let total: BigUint = blocks
        .iter()
        .map(|b| &b.multiplicity * BigUint::from(b.dim()))
        .sum();
    assert_eq!(total, BigUint::one() << n, "sector dimensions must sum to 2^N");
    debug_assert!(blocks.iter().all(|b| b.multiplicity >= BigUint::one()));
    Ok(DickeSpace {
        n_atoms: n,
        blocks,
        element_count: offset,
    })
}

impl DickeSpace {
    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn blocks(&self) -> &[DickeBlock] {
        &self.blocks
    }

    /// Number of complex entries across all blocks.
    pub fn element_count(&self) -> usize {
        self.element_count
    }

    /// Index of the block with the given doubled spin, if present.
    pub fn block_index(&self, twice_j: usize) -> Option<usize> {
        if twice_j > self.n_atoms || (self.n_atoms - twice_j) % 2 != 0 {
            return None;
        }
        Some((self.n_atoms - twice_j) / 2)
    }

    /// d_N(j) / d_N(j') for adjacent sectors, in closed form.
    fn multiplicity_ratio(&self, twice_j: usize, twice_j_src: usize) -> f64 {
        let half_n = self.n_atoms as f64 / 2.0;
        let j = twice_j as f64 / 2.0;
        if twice_j_src == twice_j {
            1.0
        } else if twice_j_src + 2 == twice_j {
            // d(j)/d(j−1)
            (2.0 * j + 1.0) * (half_n - j + 1.0) / ((2.0 * j - 1.0) * (half_n + j + 1.0))
        } else {
            // d(j)/d(j+1)
            (2.0 * j + 1.0) * (half_n + j + 2.0) / ((2.0 * j + 3.0) * (half_n - j))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DickeState {
    space: DickeSpace,
    convention: Multiplicity,
    data: Vec<Complex64>,
}

impl DickeState {
    pub fn zeros(space: DickeSpace, convention: Multiplicity) -> Self {
        let data = vec![ZERO; space.element_count];
        Self {
            space,
            convention,
            data,
        }
    }

    pub fn space(&self) -> &DickeSpace {
        &self.space
    }

    pub fn convention(&self) -> Multiplicity {
        self.convention
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn entries_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// Block element ρ_j(m, m') by doubled quantum numbers.
    pub fn get(&self, twice_j: usize, twice_m: i64, twice_m2: i64) -> Complex64 {
        let b = &self.space.blocks[self.space.block_index(twice_j).expect("valid j")];
        let k = ((twice_m + twice_j as i64) / 2) as usize;
        let k2 = ((twice_m2 + twice_j as i64) / 2) as usize;
        self.data[b.offset + k * b.dim() + k2]
    }

    pub fn set(&mut self, twice_j: usize, twice_m: i64, twice_m2: i64, value: Complex64) {
        let b = &self.space.blocks[self.space.block_index(twice_j).expect("valid j")];
        let k = ((twice_m + twice_j as i64) / 2) as usize;
        let k2 = ((twice_m2 + twice_j as i64) / 2) as usize;
        let idx = b.offset + k * b.dim() + k2;
        self.data[idx] = value;
    }

    pub fn block(&self, index: usize) -> &[Complex64] {
        let b = &self.space.blocks[index];
        &self.data[b.offset..b.offset + b.dim() * b.dim()]
    }

    /// Re-expresses the state in the other multiplicity convention.
    pub fn converted(&self, convention: Multiplicity) -> Self {
        if convention == self.convention {
            return self.clone();
        }
        let mut out = self.clone();
        out.convention = convention;
        for b in &self.space.blocks {
            let d = b.multiplicity_f64();
            let f = if convention == Multiplicity::Folded { d } else { 1.0 / d };
            for v in &mut out.data[b.offset..b.offset + b.dim() * b.dim()] {
                *v *= f;
            }
        }
        out
    }

    fn weights(&self) -> Vec<f64> {
        block_weights(&self.space, self.convention)
    }

    /// Σ_j w_j tr(block_j).
    pub fn weighted_trace(&self) -> f64 {
        observables(&self.space, &self.weights(), &self.data)[0]
    }

    pub fn population(&self) -> f64 {
        observables(&self.space, &self.weights(), &self.data)[1]
    }

    pub fn jpjm(&self) -> f64 {
        observables(&self.space, &self.weights(), &self.data)[2]
    }

    pub fn max_hermiticity_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for b in &self.space.blocks {
            let d = b.dim();
            let blk = &self.data[b.offset..b.offset + d * d];
            for r in 0..d {
                for c in r..d {
                    worst = worst.max((blk[r * d + c] - blk[c * d + r].conj()).norm());
                }
            }
        }
        worst
    }

    /// Frobenius norm of every block other than the maximal-j one.
    pub fn lower_block_norm(&self) -> f64 {
        let start = self.space.blocks.get(1).map_or(self.data.len(), |b| b.offset);
        self.data[start..].iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }
}

fn block_weights(space: &DickeSpace, convention: Multiplicity) -> Vec<f64> {
    space
        .blocks
        .iter()
        .map(|b| match convention {
            Multiplicity::Folded => 1.0,
            Multiplicity::PerCopy => b.multiplicity_f64(),
        })
        .collect()
}

/// [weighted trace, P, ⟨J+J−⟩]; all diagonal in (j, m).
fn observables(space: &DickeSpace, weights: &[f64], data: &[Complex64]) -> [f64; 3] {
    let half_n = space.n_atoms as f64 / 2.0;
    let mut out = [0.0; 3];
    for (b, &w) in space.blocks.iter().zip(weights) {
        let d = b.dim();
        let j = b.j();
        let (mut tr, mut p, mut jj) = (0.0, 0.0, 0.0);
        for k in 0..d {
            let m = b.m(k);
            let x = data[b.offset + k * d + k].re;
            tr += x;
            p += (half_n + m) * x;
            jj += (j + m) * (j - m + 1.0) * x;
        }
        out[0] += w * tr;
        out[1] += w * p;
        out[2] += w * jj;
    }
    out
}

/// Initial state in the Dicke basis. Both supported initial states are symmetric under
/// permutations, so all weight sits in the maximal block j = N/2.
pub fn encode_initial_with(
    spec: &InitialStateSpec,
    space: &DickeSpace,
    convention: Multiplicity,
) -> Result<DickeState> {
    spec.validate()?;
    let n = space.n_atoms;
    let mut state = DickeState::zeros(space.clone(), convention);
    // Amplitudes on |N/2, m⟩, indexed by excitation number k = N/2 + m.
    let mut amps = vec![ZERO; n + 1];
    match *spec {
        InitialStateSpec::SymmetricOneExcitation => amps[1] = Complex64::new(1.0, 0.0),
        InitialStateSpec::Product { theta, phi } => {
            let (e, g) = InitialStateSpec::single_atom_amplitudes(theta, phi);
            let (le, lg) = (e.norm().ln(), g.norm().ln());
            let mut ln_binom = 0.0;
            for (k, a) in amps.iter_mut().enumerate() {
                if k > 0 {
                    ln_binom += ((n - k + 1) as f64).ln() - (k as f64).ln();
                }
                let mut ln_mod = 0.5 * ln_binom;
                if k > 0 {
                    ln_mod += k as f64 * le;
                }
                if k < n {
                    ln_mod += (n - k) as f64 * lg;
                }
                *a = Complex64::from_polar(ln_mod.exp(), (n - k) as f64 * g.arg() + k as f64 * e.arg());
            }
        }
    }
    let top = &space.blocks[0];
    let d = top.dim();
    for r in 0..d {
        for c in 0..d {
            state.data[top.offset + r * d + c] = amps[r] * amps[c].conj();
        }
    }
    Ok(state)
}

pub fn encode_initial(spec: &InitialStateSpec, space: &DickeSpace) -> Result<DickeState> {
    encode_initial_with(spec, space, Multiplicity::Folded)
}

/// Transfer into destination block from one source block: coefficient on
/// ρ_src(k + shift, k' + shift) is `prefactor · factor[k] · factor[k']`.
#[derive(Debug, Clone)]
struct Transfer {
    src_offset: usize,
    src_dim: usize,
    shift: usize,
    prefactor: f64,
    /// Indexed by destination k; zero where the source index is out of range.
    factor: Vec<f64>,
}

#[derive(Debug, Clone)]
struct BlockPlan {
    offset: usize,
    dim: usize,
    /// √((j+m+1)(j−m)): J− element from m+1 down to m.
    lowering: Vec<f64>,
    /// ½(γ_guided·(j+m)(j−m+1) + γ_rad·(N/2 + m)) per k.
    half_loss: Vec<f64>,
    transfers: Vec<Transfer>,
}

/// γ_guided·D[J−] + γ_rad·Σ_i D[σ_i] restricted to permutation-invariant states.
#[derive(Debug, Clone)]
pub struct DickeLiouvillian {
    space: DickeSpace,
    rates: DecayRates,
    convention: Multiplicity,
    plans: Vec<BlockPlan>,
    weights: Vec<f64>,
}

impl DickeLiouvillian {
    pub fn new(space: &DickeSpace, rates: DecayRates, convention: Multiplicity) -> Self {
        let half_n = space.n_atoms as f64 / 2.0;
        let (gg, gr) = (rates.gamma_guided(), rates.gamma_rad());
        let mut plans = Vec::with_capacity(space.blocks.len());
        for b in &space.blocks {
            let j = b.j();
            let dim = b.dim();
            let lowering = (0..dim)
                .map(|k| {
                    let m = b.m(k);
                    ((j + m + 1.0) * (j - m)).max(0.0).sqrt()
                })
                .collect();
            let half_loss = (0..dim)
                .map(|k| {
                    let m = b.m(k);
                    0.5 * (gg * (j + m) * (j - m + 1.0) + gr * (half_n + m))
                })
                .collect();
            let mut transfers = Vec::new();
            if gr != 0.0 {
                for src_twice_j in [b.twice_j + 2, b.twice_j, b.twice_j.wrapping_sub(2)] {
                    let Some(si) = space.block_index(src_twice_j) else {
                        continue;
                    };
                    let src = &space.blocks[si];
                    let js = src.j();
                    // Source index for μ = m + 1.
                    let shift = (src_twice_j + 2 - b.twice_j) / 2;
                    // Per-copy constant × Clebsch–Gordan normalisation, with μ = m + 1.
                    let (per_copy, f): (f64, Box<dyn Fn(f64) -> f64>) = if src_twice_j == b.twice_j {
                        (
                            (half_n + 1.0) / (2.0 * js * (js + 1.0)),
                            Box::new(move |mu| (js + mu) * (js - mu + 1.0)),
                        )
                    } else if src_twice_j + 2 == b.twice_j {
                        (
                            (half_n + js + 2.0) / ((2.0 * js + 2.0) * (2.0 * js + 3.0)),
                            Box::new(move |mu| (js - mu + 1.0) * (js - mu + 2.0)),
                        )
                    } else {
                        (
                            (half_n - js + 1.0) / (2.0 * js * (2.0 * js - 1.0)),
                            Box::new(move |mu| (js + mu - 1.0) * (js + mu)),
                        )
                    };
                    let factor = (0..dim)
                        .map(|k| {
                            if k + shift >= src.dim() {
                                return 0.0;
                            }
                            f(b.m(k) + 1.0).max(0.0).sqrt()
                        })
                        .collect();
                    let ratio = match convention {
                        Multiplicity::PerCopy => 1.0,
                        Multiplicity::Folded => space.multiplicity_ratio(b.twice_j, src_twice_j),
                    };
                    transfers.push(Transfer {
                        src_offset: src.offset,
                        src_dim: src.dim(),
                        shift,
                        prefactor: gr * per_copy * ratio,
                        factor,
                    });
                }
            }
            plans.push(BlockPlan {
                offset: b.offset,
                dim,
                lowering,
                half_loss,
                transfers,
            });
        }
        Self {
            space: space.clone(),
            rates,
            convention,
            plans,
            weights: block_weights(space, convention),
        }
    }

    pub fn convention(&self) -> Multiplicity {
        self.convention
    }

    pub fn rates(&self) -> DecayRates {
        self.rates
    }

    fn apply(&self, rho: &[Complex64], out: &mut [Complex64]) {
        let gg = self.rates.gamma_guided();
        for p in &self.plans {
            let d = p.dim;
            let blk = &rho[p.offset..p.offset + d * d];
            for k in 0..d {
                for k2 in 0..d {
                    let mut acc = -blk[k * d + k2] * (p.half_loss[k] + p.half_loss[k2]);
                    if k + 1 < d && k2 + 1 < d {
                        acc += blk[(k + 1) * d + k2 + 1] * (gg * p.lowering[k] * p.lowering[k2]);
                    }
                    for t in &p.transfers {
                        let (ks, ks2) = (k + t.shift, k2 + t.shift);
                        if ks < t.src_dim && ks2 < t.src_dim {
                            let w = t.prefactor * t.factor[k] * t.factor[k2];
                            if w != 0.0 {
                                acc += rho[t.src_offset + ks * t.src_dim + ks2] * w;
                            }
                        }
                    }
                    out[p.offset + k * d + k2] = acc;
                }
            }
        }
    }
}

/// dρ/dt in the block basis. The operator and the state must share a multiplicity convention.
pub fn dicke_derivative(state: &DickeState, liouvillian: &DickeLiouvillian) -> Result<DickeState> {
    if state.convention != liouvillian.convention {
        return Err(Error::ConventionMismatch {
            state: state.convention,
            operator: liouvillian.convention,
        });
    }
    if state.space.n_atoms != liouvillian.space.n_atoms {
        return Err(Error::DimensionMismatch {
            expected: liouvillian.space.n_atoms,
            got: state.space.n_atoms,
        });
    }
    let mut out = DickeState::zeros(state.space.clone(), state.convention);
    liouvillian.apply(&state.data, &mut out.data);
    Ok(out)
}

impl OdeSystem<Complex64> for DickeLiouvillian {
    fn rhs(&self, y: &[Complex64], dy: &mut [Complex64]) {
        self.apply(y, dy);
    }

    fn n_observables(&self) -> usize {
        3
    }

    fn observe(&self, y: &[Complex64], out: &mut [f64]) {
        out.copy_from_slice(&observables(&self.space, &self.weights, y));
    }
}

#[derive(Debug, Clone)]
pub struct DickeRun {
    pub trajectory: Trajectory,
    pub final_state: DickeState,
    pub max_trace_drift: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

pub fn evolve_dicke_run(
    rates: DecayRates,
    spec: &InitialStateSpec,
    n: usize,
    config: &IntegratorConfig,
    convention: Multiplicity,
) -> Result<DickeRun> {
    config.validate()?;
    let space = enumerate_blocks(n)?;
    let rho0 = encode_initial_with(spec, &space, convention)?;
    let liou = DickeLiouvillian::new(&space, rates, convention);
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
        let drift = (row[0] - 1.0).abs();
        if drift > crate::exact::TRACE_DRIFT_TOL {
            return Err(Error::TraceDrift { t: *t, drift });
        }
        max_trace_drift = max_trace_drift.max(drift);
    }
    let col = |k: usize| -> Vec<f64> { sol.observations.iter().map(|r| r[k]).collect() };
    let population = col(1);
    let jpjm = col(2);
    let i_guided = jpjm.iter().map(|x| rates.gamma_guided() * x).collect();
    let i_rad = population.iter().map(|x| rates.gamma_rad() * x).collect();
    let trajectory = Trajectory::new(times, population, jpjm, i_guided, i_rad)?;
    Ok(DickeRun {
        trajectory,
        final_state: DickeState {
            space,
            convention,
            data: sol.final_state,
        },
        max_trace_drift,
        accepted_steps: sol.accepted_steps,
        rejected_steps: sol.rejected_steps,
    })
}

/// Exact dynamics of an ideal string of `n` atoms in the permutation-invariant sector basis.
pub fn evolve_dicke(
    rates: DecayRates,
    spec: &InitialStateSpec,
    n: usize,
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    evolve_dicke_run(rates, spec, n, config, Multiplicity::Folded).map(|r| r.trajectory)
}

/// [`evolve_dicke`] for a coupling matrix; only ideal strings are permutation invariant.
pub fn evolve_dicke_coupling(
    coupling: &CouplingMatrix,
    spec: &InitialStateSpec,
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    let rates = coupling
        .ideal_rates()
        .ok_or(Error::NonPermutationInvariantCoupling)?;
    evolve_dicke(rates, spec, coupling.n(), config)
}
