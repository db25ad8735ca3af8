//! Python bindings. Results are returned as plain dicts and lists with the
//! same layout as the JSON the command line prints.

use middom::rootfinder::RootError;
use middom::*;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde::Serialize;
use serde_json::Value;

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn root_error(e: RootError) -> PyErr {
    match e {
        RootError::NoPhaseConvergence
        | RootError::NewtonDivergence
        | RootError::NonFinite(_)
        | RootError::Unresolved(_)
        | RootError::NoRoots => PyRuntimeError::new_err(e.to_string()),
        _ => value_error(e),
    }
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match (n.as_i64(), n.as_f64()) {
            (Some(i), _) => i.into_pyobject(py)?.into_any(),
            (None, Some(f)) => f.into_pyobject(py)?.into_any(),
            (None, None) => return Err(value_error(format!("unrepresentable number {n}"))),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(to_py(py, item)?)?;
            }
            list.into_any()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, item) in map {
                dict.set_item(k, to_py(py, item)?)?;
            }
            dict.into_any()
        }
    })
}

fn serialize<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let v = serde_json::to_value(value).map_err(value_error)?;
    to_py(py, &v)
}

/// `Δ(s) = sⁿ + Σ a_k sᵏ + e^{−sτ} Σ α_k sᵏ`.
#[pyclass(name = "Quasipolynomial", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyQuasipolynomial {
    inner: RetardedQuasipolynomial,
}

#[pymethods]
impl PyQuasipolynomial {
    #[new]
    fn new(tau: f64, a: Vec<f64>, alpha: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: RetardedQuasipolynomial::new(tau, a, alpha).map_err(value_error)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: RetardedQuasipolynomial::from_json(text).map_err(value_error)?,
        })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn tau(&self) -> f64 {
        self.inner.tau()
    }

    #[getter]
    fn a(&self) -> Vec<f64> {
        self.inner.a().to_vec()
    }

    #[getter]
    fn alpha(&self) -> Vec<f64> {
        self.inner.alpha().to_vec()
    }

    fn degree(&self) -> usize {
        self.inner.degree()
    }

    fn eval(&self, s: Complex64) -> Complex64 {
        self.inner.eval(s)
    }

    #[pyo3(signature = (s, order = 1))]
    fn derivative(&self, s: Complex64, order: usize) -> PyResult<Complex64> {
        self.inner.eval_derivative(s, order).map_err(value_error)
    }

    /// All roots in `rect = (re_min, re_max, im_min, im_max)`.
    #[pyo3(signature = (rect, tol = 1e-8))]
    fn roots<'py>(&self, py: Python<'py>, rect: (f64, f64, f64, f64), tol: f64) -> PyResult<Bound<'py, PyAny>> {
        let r = Rectangle::new(rect.0, rect.1, rect.2, rect.3).map_err(root_error)?;
        let report = py.detach(|| find_roots(&self.inner, &r, tol)).map_err(root_error)?;
        serialize(py, &report)
    }

    fn count_roots(&self, rect: (f64, f64, f64, f64)) -> PyResult<i64> {
        let r = Rectangle::new(rect.0, rect.1, rect.2, rect.3).map_err(root_error)?;
        count_roots(&self.inner, &r).map_err(root_error)
    }

    #[pyo3(signature = (s0, tol = 1e-8))]
    fn certify_multiplicity(&self, s0: f64, tol: f64) -> PyResult<usize> {
        certify_multiplicity(&self.inner, s0, tol).map_err(value_error)
    }

    fn verify_dominance<'py>(&self, py: Python<'py>, s0: f64, half_height: f64) -> PyResult<Bound<'py, PyAny>> {
        let report = py
            .detach(|| verify_dominance(&self.inner, s0, half_height))
            .map_err(root_error)?;
        serialize(py, &report)
    }

    fn __repr__(&self) -> String {
        format!(
            "Quasipolynomial(tau={}, a={:?}, alpha={:?})",
            self.inner.tau(),
            self.inner.a(),
            self.inner.alpha()
        )
    }
}

#[pyfunction]
fn synthesize_mid<'py>(py: Python<'py>, n: usize, tau: f64, s0: f64) -> PyResult<Bound<'py, PyAny>> {
    serialize(py, &synthesize(n, tau, s0).map_err(value_error)?)
}

#[pyfunction]
fn mid_quasipolynomial(n: usize, tau: f64, s0: f64) -> PyResult<PyQuasipolynomial> {
    Ok(PyQuasipolynomial {
        inner: synthesize(n, tau, s0).map_err(value_error)?.quasipolynomial(),
    })
}

#[pyfunction(name = "normalized_coefficients")]
fn normalized(n: usize) -> PyResult<(Vec<f64>, Vec<f64>)> {
    normalized_coefficients(n).map_err(value_error)
}

#[pyfunction(name = "kummer_m")]
fn kummer(a: f64, b: f64, z: Complex64) -> PyResult<Complex64> {
    kummer_m(&KummerParams::new(a, b), z).map_err(value_error)
}

#[pyfunction]
fn second_order_design<'py>(py: Python<'py>, zeta: f64, omega: f64, tau: f64) -> PyResult<Bound<'py, PyAny>> {
    serialize(py, &design_second_order(zeta, omega, tau).map_err(value_error)?)
}

#[pyfunction]
fn wind_tunnel_design<'py>(
    py: Python<'py>,
    kappa: f64,
    k_gain: f64,
    tau0: f64,
    tau1: f64,
) -> PyResult<Bound<'py, PyAny>> {
    serialize(py, &design_wind_tunnel(kappa, k_gain, tau0, tau1).map_err(value_error)?)
}

/// Runs both loops of a built-in scenario and fits their decay rates on
/// `fit = (t0, t1)` when given.
#[pyfunction]
#[pyo3(signature = (name, t_end = None, dt = None, fit = None))]
fn simulate_scenario<'py>(
    py: Python<'py>,
    name: &str,
    t_end: Option<f64>,
    dt: Option<f64>,
    fit: Option<(f64, f64)>,
) -> PyResult<Bound<'py, PyAny>> {
    let scenario: Scenario = name.parse().map_err(value_error)?;
    let (default_t, default_dt) = scenario.default_horizon();
    let pair = build_scenario(scenario, t_end.unwrap_or(default_t), dt.unwrap_or(default_dt))
        .map_err(value_error)?;
    let run = |spec: &SimulationSpec| -> PyResult<SimulationTrace> {
        let mut trace = py.detach(|| simulate(spec)).map_err(value_error)?;
        if let Some((t0, t1)) = fit {
            trace.fitted_rate = Some(fit_decay_rate(&trace, t0, t1).map_err(value_error)?);
        }
        Ok(trace)
    };
    let out = PyDict::new(py);
    out.set_item("scenario", scenario.name())?;
    out.set_item("s0", pair.s0)?;
    out.set_item("open_loop", serialize(py, &run(&pair.open_loop)?)?)?;
    out.set_item("closed_loop", serialize(py, &run(&pair.closed_loop)?)?)?;
    Ok(out.into_any())
}

#[pyfunction]
#[pyo3(signature = (max_index = 30))]
fn binomial_identities(max_index: usize) -> PyResult<usize> {
    let report = binomial_suite(max_index).map_err(value_error)?;
    Ok(report.cases_checked)
}

#[pymodule]
#[pyo3(name = "middom")]
fn middom_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyQuasipolynomial>()?;
    m.add_function(wrap_pyfunction!(synthesize_mid, m)?)?;
    m.add_function(wrap_pyfunction!(mid_quasipolynomial, m)?)?;
    m.add_function(wrap_pyfunction!(normalized, m)?)?;
    m.add_function(wrap_pyfunction!(kummer, m)?)?;
    m.add_function(wrap_pyfunction!(second_order_design, m)?)?;
    m.add_function(wrap_pyfunction!(wind_tunnel_design, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(binomial_identities, m)?)?;
    Ok(())
}
