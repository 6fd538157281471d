use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("decay rate must be finite and non-negative, got {0}")]
    NegativeRate(f64),
    #[error("radiation-mode decay rate must be strictly positive")]
    ZeroRadiationRate,
    #[error("atom count must be at least 1, got {0}")]
    InvalidAtomCount(usize),
    #[error("atom count {n} outside the supported range 1..={max}")]
    AtomCountOutOfRange { n: usize, max: usize },
    #[error(
        "{n} atoms exceeds the exact-solver cap of {cap}; the density matrix alone needs {bytes} bytes"
    )]
    AtomCountExceedsCap { n: usize, cap: usize, bytes: u128 },
    #[error("coupling matrix is not square ({rows} rows, row {row} has {len} entries)")]
    NotSquare { rows: usize, row: usize, len: usize },
    #[error("coupling matrix has a non-finite entry at ({0}, {1})")]
    NonFiniteEntry(usize, usize),
    #[error("coupling matrix is not symmetric at ({i}, {j}): {a} vs {b}")]
    NotSymmetric { i: usize, j: usize, a: f64, b: f64 },
    #[error("coupling matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },
    #[error("angle {name} = {value} outside its allowed range")]
    InvalidAngle { name: &'static str, value: f64 },
    #[error("operation requires a {expected} initial state")]
    WrongKind { expected: &'static str },
    #[error("trajectory needs at least two samples")]
    EmptyTrajectory,
    #[error("sample times must be strictly increasing (index {0})")]
    NonMonotonicTimes(usize),
    #[error("natural linewidth must be positive and finite, got {0} MHz")]
    InvalidLinewidth(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("integrator step size underflow at t = {t} (h = {h})")]
    ToleranceFailure { t: f64, h: f64 },
    #[error("trace drifted by {drift:e} at t = {t}")]
    TraceDrift { t: f64, drift: f64 },
    #[error("density matrix lost positivity (eigenvalue {min_eigenvalue:e})")]
    PositivityViolation { min_eigenvalue: f64 },
    #[error("state multiplicity convention {state:?} does not match operator convention {operator:?}")]
    ConventionMismatch {
        state: crate::dicke::Multiplicity,
        operator: crate::dicke::Multiplicity,
    },
    #[error("the permutation-invariant solver requires an ideal-string coupling matrix")]
    NonPermutationInvariantCoupling,
    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),
    #[error("initial population {p0} must lie in (0, {n}]")]
    InvalidInitialPopulation { p0: f64, n: usize },
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("rate table: {0}")]
    RateTable(String),
    #[error("distance {distance_nm} nm lies outside the rate table range [{min}, {max}] nm")]
    DistanceOutOfRange { distance_nm: f64, min: f64, max: f64 },
}
