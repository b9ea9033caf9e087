//! Python bindings for the `nonclassical` crate.
//!
//! Complex arguments are Python `complex` values. Library errors surface as
//! `ValueError`; reports come back as plain dicts.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

use nonclassical::herald::{self, HeraldPattern, PdcOrder, SchemeConfig};
use nonclassical::witnesses::WitnessKind;
use nonclassical::{moments, oracle, phase_space, state, sweep, Complex64, StateParams};

fn err(e: nonclassical::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn params(alpha: Complex64, r: f64) -> PyResult<StateParams> {
    nonclassical::make_state(alpha, r).map_err(err)
}

fn parse<T: serde::de::DeserializeOwned>(what: &str, name: &str) -> PyResult<T> {
    serde_json::from_value(serde_json::Value::String(name.to_string()))
        .map_err(|_| PyValueError::new_err(format!("unknown {what} {name:?}")))
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Normalization `N` of `(t a + r a†)|α⟩`.
#[pyfunction]
fn norm(alpha: Complex64, r: f64) -> PyResult<f64> {
    Ok(params(alpha, r)?.norm())
}

/// Normalized Fock amplitudes `c_0 … c_nmax`.
#[pyfunction]
#[pyo3(signature = (alpha, r, tail_tol = 1e-12))]
fn fock_coefficients(alpha: Complex64, r: f64, tail_tol: f64) -> PyResult<Vec<Complex64>> {
    let fock = state::fock_coefficients(&params(alpha, r)?, tail_tol).map_err(err)?;
    Ok(fock.amplitudes().to_vec())
}

/// `⟨a†ᵐ aⁿ⟩`.
#[pyfunction]
fn moment(alpha: Complex64, r: f64, m: u32, n: u32) -> PyResult<Complex64> {
    moments::general_moment(&params(alpha, r)?, m, n).map_err(err)
}

/// Evaluates one witness by name (`mandel`, `hoa`, `hosps`, `hos`,
/// `agarwal-tara`, `klyshko`, `psmatrix`, `qfunc-zero`).
#[pyfunction]
#[pyo3(signature = (name, alpha, r, order = 2, beta = Complex64::new(0.1, 0.0)))]
fn witness<'py>(
    py: Python<'py>,
    name: &str,
    alpha: Complex64,
    r: f64,
    order: u32,
    beta: Complex64,
) -> PyResult<Bound<'py, PyAny>> {
    let kind: WitnessKind = parse("witness", name)?;
    let record = sweep::evaluate(kind, order, &params(alpha, r)?, beta).map_err(err)?;
    to_py(py, &record)
}

#[pyfunction]
fn husimi(alpha: Complex64, r: f64, beta: Complex64) -> PyResult<f64> {
    Ok(phase_space::husimi_q(&params(alpha, r)?, beta))
}

/// Square Husimi raster centred on `center`; rows run along the imaginary axis.
#[pyfunction]
#[pyo3(signature = (alpha, r, half_width = 3.0, points = 101, center = None))]
fn husimi_grid(
    alpha: Complex64,
    r: f64,
    half_width: f64,
    points: usize,
    center: Option<Complex64>,
) -> PyResult<Vec<Vec<f64>>> {
    let p = params(alpha, r)?;
    let spec = phase_space::GridSpec::square(half_width, center.unwrap_or(alpha), points);
    Ok(phase_space::husimi_grid(&p, spec).map_err(err)?.values)
}

#[pyfunction]
fn q_zero(alpha: Complex64, r: f64) -> PyResult<Option<Complex64>> {
    Ok(phase_space::q_zero(&params(alpha, r)?))
}

#[pyfunction]
fn psmatrix_det(alpha: Complex64, r: f64, beta1: Complex64, beta2: Complex64) -> PyResult<f64> {
    Ok(phase_space::psmatrix_det(&params(alpha, r)?, beta1, beta2))
}

/// Closed form with `β₁` at the Husimi zero.
#[pyfunction]
fn psmatrix_special(alpha: Complex64, r: f64, beta2: Complex64) -> PyResult<f64> {
    phase_space::psmatrix_special(&params(alpha, r)?, beta2).map_err(err)
}

/// Closed form versus truncated-Fock comparison of every quantity.
#[pyfunction]
#[pyo3(signature = (alpha, r, tol = 1e-8, tail_tol = 1e-12))]
fn verify<'py>(py: Python<'py>, alpha: Complex64, r: f64, tol: f64, tail_tol: f64) -> PyResult<Bound<'py, PyAny>> {
    let report = oracle::verify_all_with_tail(&params(alpha, r)?, tol, tail_tol).map_err(err)?;
    to_py(py, &report)
}

#[pyfunction]
#[pyo3(signature = (alpha, t1 = 0.995, t2 = std::f64::consts::FRAC_1_SQRT_2, eta = 0.01, pdc_order = "exact", pattern = "pd1-click-pd2-silent", cap = herald::DEFAULT_ANCILLA_CAP))]
fn scheme_fidelity<'py>(
    py: Python<'py>,
    alpha: Complex64,
    t1: f64,
    t2: f64,
    eta: f64,
    pdc_order: &str,
    pattern: &str,
    cap: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let order: PdcOrder = parse("PDC order", pdc_order)?;
    let pattern: HeraldPattern = parse("herald pattern", pattern)?;
    let mut config = SchemeConfig::new(t1, t2, eta).and_then(|c| c.with_order(order)).map_err(err)?;
    config.cap_b = cap;
    config.cap_c = cap;
    let outcome = herald::scheme_fidelity_branch(alpha, &config, pattern).map_err(err)?;
    to_py(py, &outcome)
}

#[pymodule]
pub fn pynonclassical(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(norm, m)?)?;
    m.add_function(wrap_pyfunction!(fock_coefficients, m)?)?;
    m.add_function(wrap_pyfunction!(moment, m)?)?;
    m.add_function(wrap_pyfunction!(witness, m)?)?;
    m.add_function(wrap_pyfunction!(husimi, m)?)?;
    m.add_function(wrap_pyfunction!(husimi_grid, m)?)?;
    m.add_function(wrap_pyfunction!(q_zero, m)?)?;
    m.add_function(wrap_pyfunction!(psmatrix_det, m)?)?;
    m.add_function(wrap_pyfunction!(psmatrix_special, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(scheme_fidelity, m)?)?;
    Ok(())
}
