//! Closed-form results for the ideal string: collective rate, the symmetric one-excitation
//! solution, and the mean-field (logistic) theory of product-state emission.
//!
//! Rates in γ0, times in τ0, intensities in I0 = ħω0γ0.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrate::{integrate, OdeSystem};
use crate::rates::DecayRates;

/// Below this κ the mean-field fractions switch to their series expansion.
pub const KAPPA_SERIES_THRESHOLD: f64 = 1e-8;

/// Γ = γ_rad + N γ_guided.
pub fn collective_rate(n: usize, rates: DecayRates) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidAtomCount(n));
    }
    Ok(rates.gamma_rad() + n as f64 * rates.gamma_guided())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetricSample {
    pub population: f64,
    pub i_guided: f64,
    pub i_rad: f64,
}

/// Exact decay of the symmetric one-excitation state: a single effective two-level system.
pub fn symmetric_solution(n: usize, rates: DecayRates, t: f64) -> Result<SymmetricSample> {
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    let decay = (-collective_rate(n, rates)? * t).exp();
    Ok(SymmetricSample {
        population: decay,
        i_guided: n as f64 * rates.gamma_guided() * decay,
        i_rad: rates.gamma_rad() * decay,
    })
}

/// Guided fraction of the emitted photon for the symmetric state, Nγ_guided / Γ.
pub fn symmetric_fraction(n: usize, rates: DecayRates) -> Result<f64> {
    let big_gamma = collective_rate(n, rates)?;
    Ok(n as f64 * rates.gamma_guided() / big_gamma)
}

/// The same fraction written through the cooperativity η: Nη / (1 + Nη).
pub fn symmetric_fraction_eta(n: usize, eta: f64) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidAtomCount(n));
    }
    let x = n as f64 * eta;
    Ok(x / (1.0 + x))
}

/// Parameters of the logistic mean-field solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanFieldParams {
    pub n: usize,
    pub rates: DecayRates,
    pub p0: f64,
    /// κ = (N − 1) γ_guided / γ.
    pub kappa: f64,
    /// Γ = γ_rad + N γ_guided = γ (κ + 1).
    pub big_gamma: f64,
    pub tau: f64,
    /// Time offset placing P(0) = p0 on the logistic curve.
    pub t_a: f64,
}

pub fn meanfield_params(n: usize, rates: DecayRates, p0: f64) -> Result<MeanFieldParams> {
    if n < 1 {
        return Err(Error::InvalidAtomCount(n));
    }
    let nf = n as f64;
    if !(p0 > 0.0 && p0 <= nf) {
        return Err(Error::InvalidInitialPopulation { p0, n });
    }
    let kappa = (nf - 1.0) * rates.gamma_guided() / rates.gamma_total();
    let big_gamma = collective_rate(n, rates)?;
    let tau = 1.0 / big_gamma;
    let log_arg = (kappa + 1.0) * (nf / p0) - kappa;
    debug_assert!(log_arg >= 1.0 - 1e-12);
    let t_a = if p0 == nf { 0.0 } else { tau * log_arg.ln() };
    Ok(MeanFieldParams {
        n,
        rates,
        p0,
        kappa,
        big_gamma,
        tau,
        t_a,
    })
}

impl MeanFieldParams {
    /// e^{Γ t_a} = (κ + 1) N / p0 − κ, kept exact so that P(0) = p0.
    fn exp_offset(&self) -> f64 {
        if self.p0 == self.n as f64 {
            1.0
        } else {
            (self.kappa + 1.0) * (self.n as f64 / self.p0) - self.kappa
        }
    }

    fn growth(&self, t: f64) -> f64 {
        (self.big_gamma * t).exp() * self.exp_offset()
    }

    /// Time of the local intensity peak relative to the start of the logistic curve,
    /// τ ln{(1 − 1/N)[2 + (N − 2) γ_guided/γ]}.
    pub fn t_p(&self) -> f64 {
        let nf = self.n as f64;
        let r = self.rates.gamma_guided() / self.rates.gamma_total();
        self.tau * ((1.0 - 1.0 / nf) * (2.0 + (nf - 2.0) * r)).ln()
    }
}

/// P(t) = N (κ + 1) / [κ + e^{Γ(t + t_a)}].
pub fn meanfield_population(params: &MeanFieldParams, t: f64) -> f64 {
    let e = params.growth(t);
    params.n as f64 * (params.kappa + 1.0) / (params.kappa + e)
}

/// Guided intensity of the mean-field solution, in I0.
pub fn meanfield_intensity(params: &MeanFieldParams, t: f64) -> f64 {
    let e = params.growth(t);
    if !e.is_finite() {
        return 0.0;
    }
    let k = params.kappa;
    let gamma = params.rates.gamma_total();
    params.n as f64 * (k + 1.0) / (k + e) * (gamma * (k + 1.0) * e / (k + e) - params.rates.gamma_rad())
}

/// Guided intensity at t = 0 written directly in terms of p0.
pub fn meanfield_initial_intensity(params: &MeanFieldParams) -> f64 {
    let nf = params.n as f64;
    params.p0 * params.rates.gamma_guided() * (1.0 + (nf - 1.0) * (1.0 - params.p0 / nf))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Peak {
    Local { t_max: f64, i_max: f64 },
    MonotonicDecrease,
}

/// Local maximum of the guided intensity, present iff t_a < t_p.
pub fn meanfield_peak(n: usize, rates: DecayRates, p0: f64) -> Result<Peak> {
    let params = meanfield_params(n, rates, p0)?;
    if n < 2 {
        return Ok(Peak::MonotonicDecrease);
    }
    let t_p = params.t_p();
    if params.t_a < t_p {
        let nf = n as f64;
        Ok(Peak::Local {
            t_max: t_p - params.t_a,
            i_max: rates.gamma_guided() * nf.powi(3) / (4.0 * (nf - 1.0)),
        })
    } else {
        Ok(Peak::MonotonicDecrease)
    }
}

/// (N/p0)·[ln(1 + κ) − ln(1 + sκ)] / κ with s = 1 − q, q = p0/N.
fn scaled_log_ratio(kappa: f64, q: f64) -> f64 {
    if kappa < KAPPA_SERIES_THRESHOLD {
        scaled_log_ratio_series(kappa, q)
    } else {
        // ln(1+κ) − ln(1+sκ) = ln(1 + qκ/(1 + sκ)), free of cancellation.
        let s = 1.0 - q;
        (q * kappa / (1.0 + s * kappa)).ln_1p() / (q * kappa)
    }
}

fn scaled_log_ratio_series(kappa: f64, q: f64) -> f64 {
    1.0 - 0.5 * kappa * (2.0 - q) + kappa * kappa * (3.0 - 3.0 * q + q * q) / 3.0
}

/// Fraction of the emitted energy that enters the guided modes, general p0.
pub fn meanfield_fraction(n: usize, rates: DecayRates, p0: f64) -> Result<f64> {
    let params = meanfield_params(n, rates, p0)?;
    let nf = n as f64;
    let ratio = rates.gamma_rad() / rates.gamma_total();
    Ok(1.0 - ratio * scaled_log_ratio(params.kappa, p0 / nf))
}

/// Full-excitation limit of [`meanfield_fraction`]: 1 − (γ_rad/γ) ln(1 + κ)/κ.
pub fn meanfield_fraction_full(n: usize, rates: DecayRates) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidAtomCount(n));
    }
    let kappa = (n as f64 - 1.0) * rates.gamma_guided() / rates.gamma_total();
    let ratio = rates.gamma_rad() / rates.gamma_total();
    Ok(1.0 - ratio * scaled_log_ratio(kappa, 1.0))
}

struct Logistic {
    n: f64,
    gamma: f64,
    gamma_guided: f64,
}

impl OdeSystem<f64> for Logistic {
    fn rhs(&self, y: &[f64], dy: &mut [f64]) {
        let p = y[0];
        dy[0] = -p * (self.gamma + (1.0 - 1.0 / self.n) * self.gamma_guided * (self.n - p));
    }

    fn n_observables(&self) -> usize {
        1
    }

    fn observe(&self, y: &[f64], out: &mut [f64]) {
        out[0] = y[0];
    }
}

/// Direct numerical integration of dP/dt = −P[γ + (1 − 1/N) γ_guided (N − P)] on `time_grid`.
pub fn meanfield_ode(n: usize, rates: DecayRates, p0: f64, time_grid: &[f64]) -> Result<Vec<f64>> {
    meanfield_params(n, rates, p0)?;
    if time_grid.first() != Some(&0.0) {
        return Err(Error::InvalidConfig("time grid must start at 0".into()));
    }
    let sys = Logistic {
        n: n as f64,
        gamma: rates.gamma_total(),
        gamma_guided: rates.gamma_guided(),
    };
    let max_step = time_grid[time_grid.len() - 1].max(f64::MIN_POSITIVE);
    let sol = integrate(&sys, vec![p0], time_grid, 1e-13, 1e-14 * p0.min(1.0), max_step)?;
    Ok(sol.observations.into_iter().map(|r| r[0]).collect())
}
