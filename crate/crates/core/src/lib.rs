//! Superradiant decay of atoms coupled to a nanofiber guided mode.
//!
//! Natural units throughout: rates in γ0 (single-atom free-space rate), times in τ0 = 1/γ0,
//! intensities in I0 = ħω0γ0 and energies in ħω0.
//!
//! Two solvers share one trajectory type. [`exact`] propagates the full 2^N × 2^N density
//! matrix for any positive semidefinite coupling matrix; [`dicke`] works in the
//! permutation-symmetric block decomposition and reaches hundreds of atoms for the ideal
//! string. [`analytics`] holds the closed forms used to check both.

pub mod analytics;
pub mod coupling;
pub mod dicke;
pub mod error;
pub mod exact;
pub mod geometry;
pub mod integrate;
pub mod rates;
pub mod state;
pub mod trajectory;
pub mod units;

pub use analytics::{
    collective_rate, meanfield_fraction, meanfield_fraction_full, meanfield_intensity, meanfield_ode,
    meanfield_params, meanfield_peak, meanfield_population, symmetric_fraction, symmetric_solution,
    MeanFieldParams, Peak,
};
pub use coupling::{ideal_string_matrix, load_coupling_matrix, CouplingMatrix};
pub use dicke::{enumerate_blocks, evolve_dicke, evolve_dicke_coupling, DickeSpace, DickeState, Multiplicity};
pub use error::{Error, Result};
pub use exact::{build_density_matrix, evolve_exact, lindblad_derivative, DensityMatrix};
pub use geometry::GeometryMetadata;
pub use integrate::IntegratorConfig;
pub use rates::{make_rates, DecayRates, RateTable};
pub use state::InitialStateSpec;
pub use trajectory::{trajectory_energies, Energies, Trajectory};
pub use units::cooperativity_length;
