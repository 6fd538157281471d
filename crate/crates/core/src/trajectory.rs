//! Sampled emission dynamics and the energy split between guided and radiation modes.
//!
//! Times are in τ0 = 1/γ0, intensities in I0 = ħω0γ0, energies in ħω0.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    times: Vec<f64>,
    population: Vec<f64>,
    jpjm: Vec<f64>,
    i_guided: Vec<f64>,
    i_rad: Vec<f64>,
    i_total: Vec<f64>,
    energies: Energies,
}

/// Integrated emitted energies over the sampled window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Energies {
    pub u_guided: f64,
    pub u_rad: f64,
    /// u_guided / (u_guided + u_rad); zero when nothing was emitted.
    pub f_guided: f64,
    /// Energy still stored in the atoms at the last sample, P(t_final).
    pub truncation_bound: f64,
}

impl Trajectory {
    /// Assembles a trajectory; `i_total` is formed as the pointwise sum.
    pub fn new(
        times: Vec<f64>,
        population: Vec<f64>,
        jpjm: Vec<f64>,
        i_guided: Vec<f64>,
        i_rad: Vec<f64>,
    ) -> Result<Self> {
        let len = times.len();
        for v in [&population, &jpjm, &i_guided, &i_rad] {
            if v.len() != len {
                return Err(Error::DimensionMismatch {
                    expected: len,
                    got: v.len(),
                });
            }
        }
        check_times(&times)?;
        let i_total = i_guided.iter().zip(&i_rad).map(|(g, r)| g + r).collect();
        let mut traj = Self {
            times,
            population,
            jpjm,
            i_guided,
            i_rad,
            i_total,
            energies: Energies {
                u_guided: 0.0,
                u_rad: 0.0,
                f_guided: 0.0,
                truncation_bound: 0.0,
            },
        };
        traj.energies = trajectory_energies(&traj)?;
        Ok(traj)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn population(&self) -> &[f64] {
        &self.population
    }

    pub fn jpjm(&self) -> &[f64] {
        &self.jpjm
    }

    pub fn i_guided(&self) -> &[f64] {
        &self.i_guided
    }

    pub fn i_rad(&self) -> &[f64] {
        &self.i_rad
    }

    pub fn i_total(&self) -> &[f64] {
        &self.i_total
    }

    pub fn energies(&self) -> Energies {
        self.energies
    }

    /// u_guided + u_rad + P(t_final) − P(0); zero up to quadrature error.
    pub fn budget_residual(&self) -> f64 {
        let e = self.energies;
        e.u_guided + e.u_rad + e.truncation_bound - self.population[0]
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.len() < 2 {
        return Err(Error::EmptyTrajectory);
    }
    if let Some(k) = times.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::NonMonotonicTimes(k + 1));
    }
    Ok(())
}

/// Composite trapezoidal rule on the sample grid.
pub fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

/// Trapezoidal energies emitted into each channel over the sampled window.
pub fn trajectory_energies(traj: &Trajectory) -> Result<Energies> {
    check_times(&traj.times)?;
    let u_guided = trapezoid(&traj.times, &traj.i_guided);
    let u_rad = trapezoid(&traj.times, &traj.i_rad);
    let total = u_guided + u_rad;
    Ok(Energies {
        u_guided,
        u_rad,
        f_guided: if total > 0.0 { u_guided / total } else { 0.0 },
        truncation_bound: traj.population[traj.population.len() - 1],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp_decay(rate: f64, guided: f64, t_final: f64, samples: usize) -> Trajectory {
        let times: Vec<f64> = (0..samples)
            .map(|k| t_final * k as f64 / (samples - 1) as f64)
            .collect();
        let p: Vec<f64> = times.iter().map(|t| (-rate * t).exp()).collect();
        Trajectory::new(
            times,
            p.clone(),
            p.clone(),
            p.iter().map(|x| guided * x).collect(),
            p.iter().map(|x| (rate - guided) * x).collect(),
        )
        .unwrap()
    }

    #[test]
    fn zero_guided_intensity() {
        let t = exp_decay(1.0, 0.0, 10.0, 101);
        assert_eq!(t.energies().f_guided, 0.0);
    }

    #[test]
    fn budget_closes_for_exponential() {
        let t = exp_decay(1.32, 0.26, 20.0, 2001);
        let e = t.energies();
        assert!((e.f_guided - 0.26 / 1.32).abs() < 1e-12);
        assert!(t.budget_residual().abs() < 1e-4);
        assert!(e.u_guided + e.u_rad <= 1.0 + 1e-4);
        assert_eq!(e.truncation_bound, (-1.32f64 * 20.0).exp());
    }

    #[test]
    fn rejects_bad_grids() {
        let v = vec![1.0];
        assert_eq!(
            Trajectory::new(vec![0.0], v.clone(), v.clone(), v.clone(), v).unwrap_err(),
            Error::EmptyTrajectory
        );
        let v = vec![1.0; 3];
        assert_eq!(
            Trajectory::new(vec![0.0, 1.0, 1.0], v.clone(), v.clone(), v.clone(), v).unwrap_err(),
            Error::NonMonotonicTimes(2)
        );
    }

    #[test]
    fn i_total_is_pointwise_sum() {
        let t = exp_decay(2.0, 0.5, 1.0, 11);
        for k in 0..t.len() {
            assert_eq!(t.i_total()[k], t.i_guided()[k] + t.i_rad()[k]);
        }
    }
}
