//! Fiber and string geometry. Echoed into outputs as provenance; drives no numerics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryMetadata {
    pub fiber_radius_nm: f64,
    pub core_index: f64,
    pub clad_index: f64,
    pub wavelength_nm: f64,
    pub atom_surface_distance_nm: f64,
    /// Neighbour spacings in units of the guided-mode longitudinal wavelength λ_F.
    pub spacing_multiples: Vec<u32>,
}

impl GeometryMetadata {
    /// Silica nanofiber of radius 200 nm in vacuum, Cs D2 line, atoms 100 nm from the surface.
    pub fn reference(n_atoms: usize) -> Self {
        Self {
            fiber_radius_nm: 200.0,
            core_index: 1.45,
            clad_index: 1.0,
            wavelength_nm: 852.0,
            atom_surface_distance_nm: 100.0,
            spacing_multiples: vec![1; n_atoms.saturating_sub(1)],
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("fiber_radius_nm", self.fiber_radius_nm),
            ("wavelength_nm", self.wavelength_nm),
            ("atom_surface_distance_nm", self.atom_surface_distance_nm),
            ("core_index", self.core_index),
            ("clad_index", self.clad_index),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidGeometry(format!("{name} must be positive, got {v}")));
            }
        }
        if self.core_index <= self.clad_index {
            return Err(Error::InvalidGeometry(
                "core index must exceed cladding index".into(),
            ));
        }
        if let Some(q) = self.spacing_multiples.iter().find(|&&q| q < 1) {
            return Err(Error::InvalidGeometry(format!(
                "spacing multiples must be positive integers, got {q}"
            )));
        }
        Ok(())
    }
}
