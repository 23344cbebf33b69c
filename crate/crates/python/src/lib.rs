//! Python bindings: eigenvalues, optimal boundary coefficients and the
//! closed-form bounds, on the built-in domains.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use robinspec::assembly::SigmaField;
use robinspec::bounds;
use robinspec::exact1d::{lambda1_exact, IntervalProblem};
use robinspec::geometry::{build_mesh, DomainSpec, GammaSelector, Mesh};
use robinspec::mixed_dn::MixedProblem;
use robinspec::{robin, Error};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Argument(_) | Error::Geometry(_) | Error::UnsupportedDomain(_) | Error::Range { .. } => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn domain(name: &str, sides: Option<Vec<usize>>) -> PyResult<DomainSpec> {
    let spec = match name {
        "interval" => DomainSpec::interval(0.0, 1.0),
        "square" => DomainSpec::unit_square(),
        "triangle" => DomainSpec::right_triangle(),
        "disk" => DomainSpec::disk([0.0, 0.0], 1.0, 64),
        other => return Err(PyValueError::new_err(format!("unknown domain {other:?}"))),
    };
    Ok(spec.with_gamma(sides.map_or(GammaSelector::All, GammaSelector::Sides)))
}

fn mesh(name: &str, sides: Option<Vec<usize>>, level: usize) -> PyResult<Mesh> {
    Ok(build_mesh(&domain(name, sides)?, 0.5).map_err(to_py)?.refined(level))
}

/// Lowest Robin eigenvalue with coefficient `sigma` on Γ.
#[pyfunction]
#[pyo3(signature = (domain = "square", sigma = 1.0, level = 3, sides = None))]
fn lambda1(domain: &str, sigma: f64, level: usize, sides: Option<Vec<usize>>) -> PyResult<f64> {
    let mesh = mesh(domain, sides, level)?;
    let sigma = SigmaField::on_gamma(&mesh, sigma);
    Ok(robin::lambda1(&mesh, &sigma).map_err(to_py)?.lambda1)
}

/// Exact lowest eigenvalue on `[a, b]` with endpoint coefficients.
#[pyfunction]
fn interval_lambda1(a: f64, b: f64, sigma_a: f64, sigma_b: f64) -> PyResult<f64> {
    Ok(lambda1_exact(&IntervalProblem::new(a, b, sigma_a, sigma_b).map_err(to_py)?))
}

/// Optimal coefficient of boundary mass `m`, as a dict of scalars.
#[pyfunction]
#[pyo3(signature = (m, domain = "square", level = 3, sides = None))]
fn optimal<'py>(
    py: Python<'py>,
    m: f64,
    domain: &str,
    level: usize,
    sides: Option<Vec<usize>>,
) -> PyResult<Bound<'py, PyDict>> {
    let mesh = mesh(domain, sides, level)?;
    let problem = MixedProblem::new(&mesh).map_err(to_py)?;
    let opt = problem.optimal_sigma(m).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("m", opt.m)?;
    d.set_item("xi", opt.xi)?;
    d.set_item("e1", opt.e1)?;
    d.set_item("gamma1", problem.ground.gamma1)?;
    d.set_item("area", problem.area)?;
    d.set_item("mass", opt.mass)?;
    d.set_item("mass_defect", opt.mass_defect)?;
    d.set_item("lambda_check", opt.lambda_check)?;
    d.set_item("sigma", opt.sigma_values().to_vec())?;
    Ok(d)
}

/// `(lower, upper)` bounds on the optimal eigenvalue.
#[pyfunction]
fn optimal_bounds(m: f64, e1: f64, area: f64, gamma1: f64) -> PyResult<(f64, f64)> {
    let upper = bounds::lambda_max_upper(m, e1, area, gamma1).map_err(to_py)?;
    Ok((bounds::lambda_max_lower(m, e1, area), upper))
}

/// Ball constant `K_N`.
#[pyfunction]
fn kn_ball(n: usize) -> PyResult<f64> {
    bounds::kn_ball(n).map_err(to_py)
}

#[pyfunction]
fn li_yau_bound(n: usize) -> f64 {
    bounds::li_yau_bound(n)
}

#[pymodule]
#[pyo3(name = "robinspec")]
fn robinspec_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(lambda1, m)?)?;
    m.add_function(wrap_pyfunction!(interval_lambda1, m)?)?;
    m.add_function(wrap_pyfunction!(optimal, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(kn_ball, m)?)?;
    m.add_function(wrap_pyfunction!(li_yau_bound, m)?)?;
    Ok(())
}
