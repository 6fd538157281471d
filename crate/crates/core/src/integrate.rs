//! Adaptive Dormand–Prince 5(4) integration of autonomous systems with dense output on observables.
//!
//! Systems expose a set of *linear* observables of their state. At every accepted step the
//! continuous extension of the method is applied to the observables of the stage vectors
//! rather than to the state itself, so sampling a large state on a fine grid costs only a
//! handful of observable evaluations per step.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scalar type of a state vector.
pub trait Component:
    Copy + Default + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn modulus(self) -> f64;
}

impl Component for f64 {
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Component for Complex64 {
    fn modulus(self) -> f64 {
        self.norm()
    }
}

/// Autonomous ODE y' = f(y) with linear read-outs.
pub trait OdeSystem<T: Component> {
    fn rhs(&self, y: &[T], dy: &mut [T]);
    fn n_observables(&self) -> usize;
    /// Must be linear in `y`: it is applied to stage derivatives for interpolation.
    fn observe(&self, y: &[T], out: &mut [f64]);
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Largest allowed step, τ0.
    pub max_step: f64,
    /// End of the sampled window, τ0.
    pub t_final: f64,
    pub sample_count: usize,
}

impl IntegratorConfig {
    pub const DEFAULT_REL_TOL: f64 = 1e-8;
    pub const DEFAULT_ABS_TOL: f64 = 1e-10;
    pub const DEFAULT_SAMPLES: usize = 2001;

    pub fn new(t_final: f64) -> Self {
        Self {
            rel_tol: Self::DEFAULT_REL_TOL,
            abs_tol: Self::DEFAULT_ABS_TOL,
            max_step: t_final,
            t_final,
            sample_count: Self::DEFAULT_SAMPLES,
        }
    }

    /// Window of 8 collective lifetimes, 8/Γ.
    pub fn for_collective_rate(big_gamma: f64) -> Self {
        Self::new(8.0 / big_gamma)
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_samples(mut self, sample_count: usize) -> Self {
        self.sample_count = sample_count;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.rel_tol) || !positive(self.abs_tol) {
            return Err(Error::InvalidConfig("tolerances must be positive".into()));
        }
        if !positive(self.t_final) {
            return Err(Error::InvalidConfig("t_final must be positive".into()));
        }
        if !(self.max_step > 0.0) {
            return Err(Error::InvalidConfig("max_step must be positive".into()));
        }
        if self.sample_count < 2 {
            return Err(Error::InvalidConfig("sample_count must be at least 2".into()));
        }
        Ok(())
    }

    /// Uniform grid 0, …, t_final.
    pub fn sample_times(&self) -> Vec<f64> {
        let last = (self.sample_count - 1) as f64;
        (0..self.sample_count)
            .map(|k| {
                if k + 1 == self.sample_count {
                    self.t_final
                } else {
                    self.t_final * k as f64 / last
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct Solution<T> {
    /// One row of observables per requested time.
    pub observations: Vec<Vec<f64>>,
    /// State at the last requested time.
    pub final_state: Vec<T>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

fn combine<T: Component>(out: &mut [T], y: &[T], h: f64, terms: &[(f64, &[T])]) {
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = T::default();
        for (c, k) in terms {
            acc = acc + k[i] * *c;
        }
        *o = y[i] + acc * h;
    }
}

/// Integrates `sys` from `y0` at `times[0]`, reporting observables at every entry of `times`.
pub fn integrate<T: Component, S: OdeSystem<T>>(
    sys: &S,
    y0: Vec<T>,
    times: &[f64],
    rel_tol: f64,
    abs_tol: f64,
    max_step: f64,
) -> Result<Solution<T>> {
    if times.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    if let Some(k) = times.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::NonMonotonicTimes(k + 1));
    }
    let dim = y0.len();
    let nobs = sys.n_observables();
    let t_end = times[times.len() - 1];

    let mut observations = Vec::with_capacity(times.len());
    let mut obs_y0 = vec![0.0; nobs];
    sys.observe(&y0, &mut obs_y0);
    observations.push(obs_y0.clone());

    let mut y = y0;
    let mut k1 = vec![T::default(); dim];
    sys.rhs(&y, &mut k1);
    let mut k2 = vec![T::default(); dim];
    let mut k3 = vec![T::default(); dim];
    let mut k4 = vec![T::default(); dim];
    let mut k5 = vec![T::default(); dim];
    let mut k6 = vec![T::default(); dim];
    let mut k7 = vec![T::default(); dim];
    let mut tmp = vec![T::default(); dim];
    let mut y1 = vec![T::default(); dim];

    let scale = |a: T, b: T| abs_tol + rel_tol * a.modulus().max(b.modulus());
    let mut t = times[0];
    let mut h = {
        let d0 = y.iter().map(|v| v.modulus() / scale(*v, *v)).fold(0.0, f64::max);
        let d1 = y
            .iter()
            .zip(&k1)
            .map(|(v, f)| f.modulus() / scale(*v, *v))
            .fold(0.0, f64::max);
        let guess = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        guess.min(max_step).min(t_end - t)
    };
    let mut next = 1;
    let mut accepted_steps = 0;
    let mut rejected_steps = 0;
    let mut last_rejected = false;
    let mut obs_k = vec![vec![0.0; nobs]; 6];
    let mut obs_y1 = vec![0.0; nobs];

    while next < times.len() {
        if t + h > t_end || t_end - (t + h) < 1e-12 * t_end.abs().max(1.0) {
            h = t_end - t;
        }
        if h <= 1e-14 * t.abs().max(1.0) {
            return Err(Error::ToleranceFailure { t, h });
        }

        combine(&mut tmp, &y, h, &[(A21, &k1)]);
        sys.rhs(&tmp, &mut k2);
        combine(&mut tmp, &y, h, &[(A31, &k1), (A32, &k2)]);
        sys.rhs(&tmp, &mut k3);
        combine(&mut tmp, &y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        sys.rhs(&tmp, &mut k4);
        combine(&mut tmp, &y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        sys.rhs(&tmp, &mut k5);
        combine(
            &mut tmp,
            &y,
            h,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        );
        sys.rhs(&tmp, &mut k6);
        combine(
            &mut y1,
            &y,
            h,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        );
        sys.rhs(&y1, &mut k7);

        let mut err: f64 = 0.0;
        for i in 0..dim {
            let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7)
                * h;
            err = err.max(e.modulus() / scale(y[i], y1[i]));
        }

        if err <= 1.0 {
            let t_new = if h == t_end - t { t_end } else { t + h };
            if times[next] <= t_new {
                sys.observe(&y1, &mut obs_y1);
                for (slot, k) in [&k1, &k3, &k4, &k5, &k6, &k7].iter().enumerate() {
                    sys.observe(k, &mut obs_k[slot]);
                }
                let mut obs_t = vec![0.0; nobs];
                sys.observe(&y, &mut obs_t);
                while next < times.len() && times[next] <= t_new {
                    if times[next] == t_new {
                        observations.push(obs_y1.clone());
                    } else {
                        let theta = (times[next] - t) / h;
                        let row = (0..nobs)
                            .map(|q| {
                                let ydiff = obs_y1[q] - obs_t[q];
                                let bspl = h * obs_k[0][q] - ydiff;
                                let r4 = ydiff - h * obs_k[5][q] - bspl;
                                let r5 = h
                                    * (D1 * obs_k[0][q]
                                        + D3 * obs_k[1][q]
                                        + D4 * obs_k[2][q]
                                        + D5 * obs_k[3][q]
                                        + D6 * obs_k[4][q]
                                        + D7 * obs_k[5][q]);
                                obs_t[q]
                                    + theta
                                        * (ydiff
                                            + (1.0 - theta)
                                                * (bspl + theta * (r4 + (1.0 - theta) * r5)))
                            })
                            .collect();
                        observations.push(row);
                    }
                    next += 1;
                }
            }
            std::mem::swap(&mut y, &mut y1);
            std::mem::swap(&mut k1, &mut k7);
            t = t_new;
            accepted_steps += 1;
            let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= if last_rejected { grow.min(1.0) } else { grow };
            last_rejected = false;
        } else {
            rejected_steps += 1;
            last_rejected = true;
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
        }
        h = h.min(max_step);
    }

    Ok(Solution {
        observations,
        final_state: y,
        accepted_steps,
        rejected_steps,
    })
}
