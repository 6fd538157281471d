//! Python bindings: rates, closed-form results and both master-equation solvers.

use fibersr::analytics::{meanfield_initial_intensity, MeanFieldParams as CoreMeanField};
use fibersr::dicke::Multiplicity;
use fibersr::exact::{evolve_exact_run, DEFAULT_ATOM_CAP};
use fibersr::units::CS_D2_LINEWIDTH_MHZ;
use fibersr::{
    collective_rate as core_collective_rate, ideal_string_matrix, load_coupling_matrix,
    DecayRates as CoreRates, InitialStateSpec, IntegratorConfig, Peak, RateTable,
    Trajectory as CoreTrajectory,
};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

create_exception!(fibersr_py, FiberSrError, PyValueError);

fn err(e: fibersr::Error) -> PyErr {
    FiberSrError::new_err(e.to_string())
}

/// Guided and radiation decay rates of one atom, in units of γ0.
#[pyclass(frozen, from_py_object, name = "DecayRates")]
#[derive(Clone, Copy)]
struct PyRates(CoreRates);

#[pymethods]
impl PyRates {
    #[new]
    fn new(gamma_guided: f64, gamma_rad: f64) -> PyResult<Self> {
        CoreRates::new(gamma_guided, gamma_rad).map(Self).map_err(err)
    }

    /// Rates at an atom-surface distance from the shipped table, or from `table_csv` text.
    #[staticmethod]
    #[pyo3(signature = (distance_nm, table_csv=None))]
    fn at_distance(distance_nm: f64, table_csv: Option<&str>) -> PyResult<Self> {
        let table = match table_csv {
            Some(text) => RateTable::from_csv_str(text).map_err(err)?,
            None => RateTable::shipped(),
        };
        table.lookup(distance_nm).map(Self).map_err(err)
    }

    #[getter]
    fn gamma_guided(&self) -> f64 {
        self.0.gamma_guided()
    }

    #[getter]
    fn gamma_rad(&self) -> f64 {
        self.0.gamma_rad()
    }

    #[getter]
    fn gamma_total(&self) -> f64 {
        self.0.gamma_total()
    }

    #[getter]
    fn eta(&self) -> Option<f64> {
        self.0.eta()
    }

    fn __repr__(&self) -> String {
        format!(
            "DecayRates(gamma_guided={}, gamma_rad={})",
            self.0.gamma_guided(),
            self.0.gamma_rad()
        )
    }
}

/// Closed-form mean-field parameters for a string starting in a product state.
#[pyclass(frozen, name = "MeanFieldParams")]
struct PyMeanField(CoreMeanField);

#[pymethods]
impl PyMeanField {
    #[new]
    fn new(n: usize, rates: PyRates, p0: f64) -> PyResult<Self> {
        fibersr::meanfield_params(n, rates.0, p0).map(Self).map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n
    }

    #[getter]
    fn p0(&self) -> f64 {
        self.0.p0
    }

    #[getter]
    fn kappa(&self) -> f64 {
        self.0.kappa
    }

    #[getter]
    fn big_gamma(&self) -> f64 {
        self.0.big_gamma
    }

    #[getter]
    fn t_a(&self) -> f64 {
        self.0.t_a
    }

    #[getter]
    fn t_p(&self) -> f64 {
        self.0.t_p()
    }

    fn population(&self, t: f64) -> f64 {
        fibersr::meanfield_population(&self.0, t)
    }

    fn intensity(&self, t: f64) -> f64 {
        if t == 0.0 {
            meanfield_initial_intensity(&self.0)
        } else {
            fibersr::meanfield_intensity(&self.0, t)
        }
    }
}

/// Sampled emission observables of one run.
#[pyclass(frozen, name = "Trajectory")]
struct PyTrajectory {
    inner: CoreTrajectory,
    accepted_steps: usize,
    rejected_steps: usize,
    max_trace_drift: f64,
}

#[pymethods]
impl PyTrajectory {
    #[getter]
    fn times(&self) -> Vec<f64> {
        self.inner.times().to_vec()
    }

    #[getter]
    fn population(&self) -> Vec<f64> {
        self.inner.population().to_vec()
    }

    #[getter]
    fn jpjm(&self) -> Vec<f64> {
        self.inner.jpjm().to_vec()
    }

    #[getter]
    fn i_guided(&self) -> Vec<f64> {
        self.inner.i_guided().to_vec()
    }

    #[getter]
    fn i_rad(&self) -> Vec<f64> {
        self.inner.i_rad().to_vec()
    }

    #[getter]
    fn i_total(&self) -> Vec<f64> {
        self.inner.i_total().to_vec()
    }

    #[getter]
    fn accepted_steps(&self) -> usize {
        self.accepted_steps
    }

    #[getter]
    fn rejected_steps(&self) -> usize {
        self.rejected_steps
    }

    #[getter]
    fn max_trace_drift(&self) -> f64 {
        self.max_trace_drift
    }

    /// `(u_guided, u_rad, f_guided, truncation_bound)` in units of ħω0.
    fn energies(&self) -> (f64, f64, f64, f64) {
        let e = self.inner.energies();
        (e.u_guided, e.u_rad, e.f_guided, e.truncation_bound)
    }

    fn budget_residual(&self) -> f64 {
        self.inner.budget_residual()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

#[pyfunction]
fn collective_rate(n: usize, rates: PyRates) -> PyResult<f64> {
    core_collective_rate(n, rates.0).map_err(err)
}

#[pyfunction]
fn symmetric_fraction(n: usize, rates: PyRates) -> PyResult<f64> {
    fibersr::symmetric_fraction(n, rates.0).map_err(err)
}

#[pyfunction]
fn meanfield_fraction(n: usize, rates: PyRates, p0: f64) -> PyResult<f64> {
    fibersr::meanfield_fraction(n, rates.0, p0).map_err(err)
}

/// `(t_max, i_max)` of the guided intensity, or None when it decreases from t = 0.
#[pyfunction]
fn meanfield_peak(n: usize, rates: PyRates, p0: f64) -> PyResult<Option<(f64, f64)>> {
    Ok(match fibersr::meanfield_peak(n, rates.0, p0).map_err(err)? {
        Peak::Local { t_max, i_max } => Some((t_max, i_max)),
        Peak::MonotonicDecrease => None,
    })
}

/// Initial population of the product state with Bloch angle `theta`.
#[pyfunction]
#[pyo3(signature = (n, theta, phi=0.0))]
fn product_population(n: usize, theta: f64, phi: f64) -> PyResult<f64> {
    let spec = InitialStateSpec::product(theta, phi).map_err(err)?;
    Ok(spec.initial_population(n))
}

/// Cooperativity length c/Γ in meters for a linewidth γ0/2π given in MHz.
#[pyfunction]
#[pyo3(signature = (n, rates, linewidth_mhz=CS_D2_LINEWIDTH_MHZ))]
fn cooperativity_length(n: usize, rates: PyRates, linewidth_mhz: f64) -> PyResult<f64> {
    fibersr::cooperativity_length(n, rates.0, linewidth_mhz).map_err(err)
}

fn initial_state(init: &str, theta: f64, phi: f64) -> PyResult<InitialStateSpec> {
    match init {
        "symmetric" => Ok(InitialStateSpec::SymmetricOneExcitation),
        "product" => InitialStateSpec::product(theta, phi).map_err(err),
        other => Err(PyValueError::new_err(format!(
            "init must be \"symmetric\" or \"product\", got {other:?}"
        ))),
    }
}

fn integrator(t_final: f64, samples: usize, rel_tol: f64, abs_tol: f64) -> PyResult<IntegratorConfig> {
    let config = IntegratorConfig::new(t_final)
        .with_samples(samples)
        .with_tolerances(rel_tol, abs_tol);
    config.validate().map_err(err)?;
    Ok(config)
}

/// Integrates the master equation of an ideal string.
///
/// `solver` is "exact" (full density matrix, N ≤ 10) or "dicke" (permutation-symmetric
/// blocks). `t_final` defaults to 8/Γ.
#[pyfunction]
#[pyo3(signature = (
    solver, n, rates, init="symmetric", theta=0.0, phi=0.0, t_final=None,
    samples=IntegratorConfig::DEFAULT_SAMPLES, rel_tol=IntegratorConfig::DEFAULT_REL_TOL,
    abs_tol=IntegratorConfig::DEFAULT_ABS_TOL,
))]
#[allow(clippy::too_many_arguments)]
fn evolve(
    py: Python<'_>,
    solver: &str,
    n: usize,
    rates: PyRates,
    init: &str,
    theta: f64,
    phi: f64,
    t_final: Option<f64>,
    samples: usize,
    rel_tol: f64,
    abs_tol: f64,
) -> PyResult<PyTrajectory> {
    if solver != "exact" && solver != "dicke" {
        return Err(PyValueError::new_err(format!(
            "solver must be \"exact\" or \"dicke\", got {solver:?}"
        )));
    }
    let spec = initial_state(init, theta, phi)?;
    let big_gamma = core_collective_rate(n, rates.0).map_err(err)?;
    let config = integrator(t_final.unwrap_or(8.0 / big_gamma), samples, rel_tol, abs_tol)?;
    let result = py.detach(|| {
        if solver == "exact" {
            let coupling = ideal_string_matrix(n, rates.0)?;
            evolve_exact_run(&coupling, &spec, &config, DEFAULT_ATOM_CAP).map(|r| {
                (r.trajectory, r.accepted_steps, r.rejected_steps, r.max_trace_drift)
            })
        } else {
            fibersr::dicke::evolve_dicke_run(rates.0, &spec, n, &config, Multiplicity::Folded)
                .map(|r| (r.trajectory, r.accepted_steps, r.rejected_steps, r.max_trace_drift))
        }
    });
    let (inner, accepted_steps, rejected_steps, max_trace_drift) = result.map_err(err)?;
    Ok(PyTrajectory { inner, accepted_steps, rejected_steps, max_trace_drift })
}

/// Exact evolution under an arbitrary real symmetric coupling matrix, given as rows.
#[pyfunction]
#[pyo3(signature = (
    matrix, t_final, init="symmetric", theta=0.0, phi=0.0, guided=None,
    samples=IntegratorConfig::DEFAULT_SAMPLES, rel_tol=IntegratorConfig::DEFAULT_REL_TOL,
    abs_tol=IntegratorConfig::DEFAULT_ABS_TOL,
))]
#[allow(clippy::too_many_arguments)]
fn evolve_coupling(
    py: Python<'_>,
    matrix: Vec<Vec<f64>>,
    t_final: f64,
    init: &str,
    theta: f64,
    phi: f64,
    guided: Option<Vec<Vec<f64>>>,
    samples: usize,
    rel_tol: f64,
    abs_tol: f64,
) -> PyResult<PyTrajectory> {
    let spec = initial_state(init, theta, phi)?;
    let config = integrator(t_final, samples, rel_tol, abs_tol)?;
    let mut coupling = load_coupling_matrix(&matrix).map_err(err)?;
    if let Some(g) = guided {
        coupling = coupling.with_guided_part(&g).map_err(err)?;
    }
    let run = py
        .detach(|| evolve_exact_run(&coupling, &spec, &config, DEFAULT_ATOM_CAP))
        .map_err(err)?;
    Ok(PyTrajectory {
        inner: run.trajectory,
        accepted_steps: run.accepted_steps,
        rejected_steps: run.rejected_steps,
        max_trace_drift: run.max_trace_drift,
    })
}

#[pymodule]
fn fibersr_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("FiberSrError", m.py().get_type::<FiberSrError>())?;
    m.add_class::<PyRates>()?;
    m.add_class::<PyMeanField>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_function(wrap_pyfunction!(collective_rate, m)?)?;
    m.add_function(wrap_pyfunction!(symmetric_fraction, m)?)?;
    m.add_function(wrap_pyfunction!(meanfield_fraction, m)?)?;
    m.add_function(wrap_pyfunction!(meanfield_peak, m)?)?;
    m.add_function(wrap_pyfunction!(product_population, m)?)?;
    m.add_function(wrap_pyfunction!(cooperativity_length, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(evolve_coupling, m)?)?;
    Ok(())
}
