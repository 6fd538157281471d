//! Single-atom decay rates and the distance-indexed rate table.
//!
//! All rates are expressed in units of the natural linewidth γ0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rates of spontaneous decay of one atom into the guided and radiation modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayRates {
    gamma_guided: f64,
    gamma_rad: f64,
}

impl DecayRates {
    /// Validated constructor. Rejects negative, non-finite, or zero radiation rates.
    pub fn new(gamma_guided: f64, gamma_rad: f64) -> Result<Self> {
        let rates = Self::allowing_zero_radiation(gamma_guided, gamma_rad)?;
        if gamma_rad == 0.0 {
            return Err(Error::ZeroRadiationRate);
        }
        Ok(rates)
    }

    /// Like [`DecayRates::new`] but admits `gamma_rad = 0` (pure collective decay).
    /// The cooperativity parameter is then undefined and [`DecayRates::eta`] returns `None`.
    pub fn allowing_zero_radiation(gamma_guided: f64, gamma_rad: f64) -> Result<Self> {
        for r in [gamma_guided, gamma_rad] {
            if !r.is_finite() || r < 0.0 {
                return Err(Error::NegativeRate(r));
            }
        }
        Ok(Self {
            gamma_guided,
            gamma_rad,
        })
    }

    pub fn gamma_guided(&self) -> f64 {
        self.gamma_guided
    }

    pub fn gamma_rad(&self) -> f64 {
        self.gamma_rad
    }

    /// Total single-atom decay rate γ = γ_guided + γ_rad.
    pub fn gamma_total(&self) -> f64 {
        self.gamma_guided + self.gamma_rad
    }

    /// Single-atom cooperativity η = γ_guided / γ_rad.
    pub fn eta(&self) -> Option<f64> {
        (self.gamma_rad > 0.0).then(|| self.gamma_guided / self.gamma_rad)
    }
}

/// Builds [`DecayRates`] from rates in γ0 units.
pub fn make_rates(gamma_guided: f64, gamma_rad: f64) -> Result<DecayRates> {
    DecayRates::new(gamma_guided, gamma_rad)
}

/// Rates at r − a = 100 nm from a 200 nm radius fiber, Cs D2 line, radial dipole.
pub const ANCHOR_100NM: (f64, f64) = (0.26, 1.06);

/// Shipped rate table. Only the single verified anchor point is included.
pub const SHIPPED_RATE_TABLE: &str = include_str!("../data/rates.csv");

#[derive(Debug, Deserialize)]
struct RateRow {
    distance_nm: f64,
    gamma_guided: f64,
    gamma_rad: f64,
}

/// Atom-surface distance → decay rates, linearly interpolated, no extrapolation.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    rows: Vec<(f64, DecayRates)>,
}

impl RateTable {
    /// Parses CSV with header `distance_nm,gamma_guided,gamma_rad`, ascending distances.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| Error::RateTable(e.to_string()))?
            .clone();
        if headers.iter().collect::<Vec<_>>() != ["distance_nm", "gamma_guided", "gamma_rad"] {
            return Err(Error::RateTable(format!(
                "expected header `distance_nm,gamma_guided,gamma_rad`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut rows: Vec<(f64, DecayRates)> = Vec::new();
        for (line, rec) in reader.deserialize::<RateRow>().enumerate() {
            let row = rec.map_err(|e| Error::RateTable(format!("row {}: {e}", line + 1)))?;
            if !row.distance_nm.is_finite() || row.distance_nm < 0.0 {
                return Err(Error::RateTable(format!(
                    "row {}: invalid distance {}",
                    line + 1,
                    row.distance_nm
                )));
            }
            if let Some((prev, _)) = rows.last() {
                if row.distance_nm <= *prev {
                    return Err(Error::RateTable(format!(
                        "row {}: distances must be strictly ascending",
                        line + 1
                    )));
                }
            }
            rows.push((row.distance_nm, DecayRates::new(row.gamma_guided, row.gamma_rad)?));
        }
        if rows.is_empty() {
            return Err(Error::RateTable("table has no rows".into()));
        }
        Ok(Self { rows })
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::RateTable(format!("{}: {e}", path.display())))?;
        Self::from_csv_str(&text)
    }

    pub fn shipped() -> Self {
        Self::from_csv_str(SHIPPED_RATE_TABLE).expect("shipped rate table is valid")
    }

    pub fn distances(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(|(d, _)| *d)
    }

    pub fn contains(&self, distance_nm: f64) -> bool {
        self.lookup(distance_nm).is_ok()
    }

    pub fn lookup(&self, distance_nm: f64) -> Result<DecayRates> {
        let min = self.rows[0].0;
        let max = self.rows[self.rows.len() - 1].0;
        if !(min..=max).contains(&distance_nm) {
            return Err(Error::DistanceOutOfRange { distance_nm, min, max });
        }
        let hi = self.rows.partition_point(|(d, _)| *d < distance_nm);
        let (d1, r1) = self.rows[hi];
        if d1 == distance_nm || hi == 0 {
            return Ok(r1);
        }
        let (d0, r0) = self.rows[hi - 1];
        let w = (distance_nm - d0) / (d1 - d0);
        let lerp = |a: f64, b: f64| a + w * (b - a);
        DecayRates::new(
            lerp(r0.gamma_guided, r1.gamma_guided),
            lerp(r0.gamma_rad, r1.gamma_rad),
        )
    }
}
