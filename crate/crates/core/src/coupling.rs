//! The collective decay matrix γ_ij.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::rates::DecayRates;

/// Relative tolerance on the smallest eigenvalue, scaled by the largest diagonal entry.
pub const PSD_REL_TOL: f64 = 1e-10;

/// Symmetric positive-semidefinite N×N matrix of collective decay coefficients in γ0 units.
///
/// `ideal` is set only by [`ideal_string_matrix`]; matrices loaded from raw entries never carry
/// the flag even if their entries happen to have the ideal-string structure.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    n: usize,
    entries: Vec<f64>,
    guided: Option<Vec<f64>>,
    ideal: Option<DecayRates>,
}

/// One decay channel of the diagonalised coupling matrix: rate λ_k and real weights v_k.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayChannel {
    pub rate: f64,
    pub weights: Vec<f64>,
}

impl CouplingMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn is_ideal_string(&self) -> bool {
        self.ideal.is_some()
    }

    /// The rates that generated this matrix, if it is an ideal string.
    pub fn ideal_rates(&self) -> Option<DecayRates> {
        self.ideal
    }

    /// Guided-mode contribution γ_ij^(guided), row-major.
    ///
    /// For an ideal string this is γ_guided everywhere. For a loaded matrix it is whatever
    /// was attached with [`CouplingMatrix::with_guided_part`], or zero when nothing was.
    pub fn guided_entry(&self, i: usize, j: usize) -> f64 {
        match (&self.ideal, &self.guided) {
            (Some(r), _) => r.gamma_guided(),
            (None, Some(g)) => g[i * self.n + j],
            (None, None) => 0.0,
        }
    }

    pub fn has_guided_part(&self) -> bool {
        self.ideal.is_some() || self.guided.is_some()
    }

    /// Attach the guided-mode part of a loaded matrix. Must be symmetric and PSD.
    pub fn with_guided_part(mut self, guided: &[Vec<f64>]) -> Result<Self> {
        let (n, flat) = validate(guided)?;
        if n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: n,
            });
        }
        self.guided = Some(flat);
        Ok(self)
    }

    pub fn smallest_eigenvalue(&self) -> f64 {
        smallest_eigenvalue(self.n, &self.entries)
    }

    /// Diagonalises γ = Σ_k λ_k v_k v_kᵀ, dropping channels whose rate is below the PSD tolerance.
    pub fn decay_channels(&self) -> Vec<DecayChannel> {
        let m = DMatrix::from_row_slice(self.n, self.n, &self.entries);
        let tol = psd_tol(self.n, &self.entries);
        let eig = SymmetricEigen::new(m);
        eig.eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > tol)
            .map(|(k, &l)| DecayChannel {
                rate: l,
                weights: eig.eigenvectors.column(k).iter().copied().collect(),
            })
            .collect()
    }
}

fn psd_tol(n: usize, flat: &[f64]) -> f64 {
    let max_diag = (0..n).map(|i| flat[i * n + i]).fold(0.0, f64::max);
    PSD_REL_TOL * max_diag
}

fn smallest_eigenvalue(n: usize, flat: &[f64]) -> f64 {
    let m = DMatrix::from_row_slice(n, n, flat);
    m.symmetric_eigenvalues().min()
}

fn validate(rows: &[Vec<f64>]) -> Result<(usize, Vec<f64>)> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::InvalidAtomCount(0));
    }
    let mut flat = Vec::with_capacity(n * n);
    for (r, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(Error::NotSquare {
                rows: n,
                row: r,
                len: row.len(),
            });
        }
        for (c, &x) in row.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::NonFiniteEntry(r, c));
            }
        }
        flat.extend_from_slice(row);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (flat[i * n + j], flat[j * n + i]);
            if a != b {
                return Err(Error::NotSymmetric { i, j, a, b });
            }
        }
    }
    let min_eigenvalue = smallest_eigenvalue(n, &flat);
    if min_eigenvalue < -psd_tol(n, &flat) {
        return Err(Error::NotPositiveSemidefinite { min_eigenvalue });
    }
    Ok((n, flat))
}

/// γ_guided·(all ones) + γ_rad·(identity): atoms on a line parallel to the fiber axis,
/// spaced by integer multiples of the guided-mode longitudinal wavelength.
pub fn ideal_string_matrix(n: usize, rates: DecayRates) -> Result<CouplingMatrix> {
    if n < 1 {
        return Err(Error::InvalidAtomCount(n));
    }
    let mut entries = vec![rates.gamma_guided(); n * n];
    for i in 0..n {
        entries[i * n + i] = rates.gamma_total();
    }
    Ok(CouplingMatrix {
        n,
        entries,
        guided: None,
        ideal: Some(rates),
    })
}

/// Validates an arbitrary γ_ij (symmetric, PSD). The result is never flagged as an ideal string.
pub fn load_coupling_matrix(entries: &[Vec<f64>]) -> Result<CouplingMatrix> {
    let (n, flat) = validate(entries)?;
    Ok(CouplingMatrix {
        n,
        entries: flat,
        guided: None,
        ideal: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rates::make_rates;

    fn rows(m: &CouplingMatrix) -> Vec<Vec<f64>> {
        (0..m.n())
            .map(|i| (0..m.n()).map(|j| m.get(i, j)).collect())
            .collect()
    }

    #[test]
    fn single_atom() {
        let m = ideal_string_matrix(1, make_rates(0.26, 1.06).unwrap()).unwrap();
        assert_eq!(m.entries(), &[0.26 + 1.06]);
        assert!(m.is_ideal_string());
    }

    #[test]
    fn three_atoms_structure() {
        let m = ideal_string_matrix(3, make_rates(0.26, 1.06).unwrap()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.32 } else { 0.26 };
                assert!((m.get(i, j) - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn two_atom_eigenvalues() {
        // [[1, .5], [.5, 1]] has eigenvalues 1 ± 0.5.
        let m = ideal_string_matrix(2, make_rates(0.5, 0.5).unwrap()).unwrap();
        let mut ev: Vec<f64> = m.decay_channels().iter().map(|c| c.rate).collect();
        ev.sort_by(f64::total_cmp);
        assert!((ev[0] - 0.5).abs() < 1e-14 && (ev[1] - 1.5).abs() < 1e-14);
        assert!((m.smallest_eigenvalue() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn ideal_string_spectrum() {
        let r = make_rates(0.26, 1.06).unwrap();
        for n in 1..=8 {
            let m = ideal_string_matrix(n, r).unwrap();
            let mut ev: Vec<f64> = DMatrix::from_row_slice(n, n, m.entries())
                .symmetric_eigenvalues()
                .iter()
                .copied()
                .collect();
            ev.sort_by(f64::total_cmp);
            for &l in &ev[..n - 1] {
                assert!((l - 1.06).abs() < 1e-12);
            }
            assert!((ev[n - 1] - (1.06 + n as f64 * 0.26)).abs() < 1e-12);
        }
    }

    #[test]
    fn load_identity_and_reject() {
        let id = load_coupling_matrix(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(!id.is_ideal_string());
        match load_coupling_matrix(&[vec![1.0, 2.0], vec![2.0, 1.0]]) {
            Err(Error::NotPositiveSemidefinite { min_eigenvalue }) => {
                assert!((min_eigenvalue + 1.0).abs() < 1e-12)
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            load_coupling_matrix(&[vec![1.0, 0.2], vec![0.1, 1.0]]),
            Err(Error::NotSymmetric { .. })
        ));
        assert!(matches!(
            load_coupling_matrix(&[vec![1.0, 0.2], vec![0.1]]),
            Err(Error::NotSquare { .. })
        ));
        assert!(load_coupling_matrix(&[vec![f64::NAN]]).is_err());
    }

    #[test]
    fn round_trip_drops_flag() {
        let m = ideal_string_matrix(3, make_rates(0.26, 1.06).unwrap()).unwrap();
        let back = load_coupling_matrix(&rows(&m)).unwrap();
        assert_eq!(back.entries(), m.entries());
        assert!(!back.is_ideal_string());
        assert!(!back.has_guided_part());
        assert_eq!(back.guided_entry(0, 1), 0.0);
        let g = vec![vec![0.26; 3]; 3];
        let back = back.with_guided_part(&g).unwrap();
        assert_eq!(back.guided_entry(2, 0), 0.26);
    }
}
