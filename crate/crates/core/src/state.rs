//! Symbolic initial atomic states.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Initial state of the atom string.
///
/// `Product` is Π_j (cos(θ/2)|e_j⟩ + e^{iφ} sin(θ/2)|g_j⟩): θ = 0 is full excitation,
/// θ = π leaves every atom in the ground state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialStateSpec {
    /// N^{-1/2} Σ_j |e_j⟩ ⊗ Π_{j'≠j} |g_j'⟩, the first excited Dicke state.
    SymmetricOneExcitation,
    Product { theta: f64, phi: f64 },
}

impl InitialStateSpec {
    pub fn product(theta: f64, phi: f64) -> Result<Self> {
        let spec = Self::Product { theta, phi };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if let Self::Product { theta, phi } = *self {
            if !(0.0..=PI).contains(&theta) {
                return Err(Error::InvalidAngle {
                    name: "theta",
                    value: theta,
                });
            }
            if !(0.0..TAU).contains(&phi) {
                return Err(Error::InvalidAngle {
                    name: "phi",
                    value: phi,
                });
            }
        }
        Ok(())
    }

    /// Excited and ground amplitudes of the single-atom factor of a product state.
    pub(crate) fn single_atom_amplitudes(theta: f64, phi: f64) -> (Complex64, Complex64) {
        let (s, c) = (theta / 2.0).sin_cos();
        (
            Complex64::new(c, 0.0),
            Complex64::from_polar(s, phi),
        )
    }

    /// Total excited population P(0) for `n` atoms.
    pub fn initial_population(&self, n: usize) -> f64 {
        match *self {
            Self::SymmetricOneExcitation => 1.0,
            Self::Product { theta, .. } => n as f64 * (theta / 2.0).cos().powi(2),
        }
    }
}

/// Initial population and per-pair correlation ⟨σ_j†σ_j'⟩ (j ≠ j') of a product state.
///
/// The summed cross-correlation Σ_{j≠j'} is `n (n − 1) c0`.
pub fn product_state_moments(spec: &InitialStateSpec, n: usize) -> Result<(f64, f64)> {
    spec.validate()?;
    match *spec {
        InitialStateSpec::SymmetricOneExcitation => Err(Error::WrongKind {
            expected: "product",
        }),
        InitialStateSpec::Product { theta, .. } => {
            let (s, c) = (theta / 2.0).sin_cos();
            let (c2, s2) = (c * c, s * s);
            Ok((n as f64 * c2, c2 * s2))
        }
    }
}
