//! Unit conventions and the one quantity that leaves natural units.

use std::f64::consts::TAU;

use crate::analytics::collective_rate;
use crate::error::{Error, Result};
use crate::rates::DecayRates;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Natural linewidth of the Cs D2 line, γ0/2π in MHz.
pub const CS_D2_LINEWIDTH_MHZ: f64 = 5.3;

/// Cooperativity length L0 = c/Γ in meters.
///
/// `gamma0_linewidth_mhz` is the ordinary-frequency linewidth γ0/2π; the angular rate
/// entering c/Γ carries the 2π.
pub fn cooperativity_length(n: usize, rates: DecayRates, gamma0_linewidth_mhz: f64) -> Result<f64> {
    if !(gamma0_linewidth_mhz.is_finite() && gamma0_linewidth_mhz > 0.0) {
        return Err(Error::InvalidLinewidth(gamma0_linewidth_mhz));
    }
    let big_gamma = collective_rate(n, rates)?;
    Ok(SPEED_OF_LIGHT / (big_gamma * TAU * gamma0_linewidth_mhz * 1e6))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rates::make_rates;

    #[test]
    fn anchor_values() {
        let r = make_rates(0.26, 1.06).unwrap();
        let l100 = cooperativity_length(100, r, 5.3).unwrap();
        assert!((l100 - 0.33).abs() < 0.01, "{l100}");
        let l10 = cooperativity_length(10, r, 5.3).unwrap();
        assert!((l10 - SPEED_OF_LIGHT / (3.66 * TAU * 5.3e6)).abs() < 1e-12);
        assert!((l10 - 2.46).abs() < 0.005);
        let l1 = cooperativity_length(1, r, 5.3).unwrap();
        assert!((l1 - 6.82).abs() < 0.005);
    }

    #[test]
    fn unit_linewidth_identity() {
        let r = make_rates(0.0, 1.0).unwrap();
        let l = cooperativity_length(1, r, 1.0 / TAU).unwrap();
        assert!((l - SPEED_OF_LIGHT / 1e6).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_linewidth() {
        let r = make_rates(0.26, 1.06).unwrap();
        assert_eq!(cooperativity_length(1, r, 0.0), Err(Error::InvalidLinewidth(0.0)));
        assert!(cooperativity_length(1, r, f64::NAN).is_err());
    }

    #[test]
    fn decreasing_in_atom_number() {
        let r = make_rates(0.26, 1.06).unwrap();
        let ls: Vec<f64> = (1..=200).map(|n| cooperativity_length(n, r, 5.3).unwrap()).collect();
        assert!(ls.windows(2).all(|w| w[1] < w[0]));
    }
}
