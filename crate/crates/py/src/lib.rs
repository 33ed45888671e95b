//! Python bindings. Structured results cross the boundary as JSON and come
//! back as plain dicts and lists.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use bosecond::config::{self, Preset};
use bosecond::equilibrium::{condensate_rounded_formula, solve_equilibrium};
use bosecond::kernel::{w_quadrature, KernelFamily, KernelModel, QuadConfig, WRule};
use bosecond::simulator::run;
use bosecond::suite::{run_suite, Suite};
use bosecond::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Config { .. } | Error::Precondition(_) | Error::Domain(_) => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn model(family: &str, eta: Option<f64>, b0: Option<f64>) -> PyResult<KernelModel> {
    let need = |v: Option<f64>, name: &str| v.ok_or_else(|| PyValueError::new_err(format!("{family} kernel needs {name}")));
    match family.parse::<KernelFamily>().map_err(py_err)? {
        KernelFamily::HardSphere => Ok(KernelModel::hard_sphere()),
        KernelFamily::Yukawa => Ok(KernelModel::yukawa()),
        KernelFamily::Power => KernelModel::power(need(eta, "eta")?, need(b0, "b0")?).map_err(py_err),
        KernelFamily::Tabulated => Err(PyValueError::new_err("tabulated kernels need a config file")),
    }
}

/// Equilibrium state for mass `n` and energy `e`.
#[pyfunction]
#[pyo3(signature = (n, e, tol = 1e-12))]
fn equilibrium(py: Python<'_>, n: f64, e: f64, tol: f64) -> PyResult<Py<PyAny>> {
    let state = solve_equilibrium(n, e, tol).map_err(py_err)?;
    let out = to_py(py, &state)?;
    out.bind(py).set_item("condensate_rounded_formula", condensate_rounded_formula(n, e))?;
    Ok(out)
}

/// `W(x, y, z)` by quadrature.
#[pyfunction]
#[pyo3(signature = (family, x, y, z, eta = None, b0 = None))]
fn kernel_w(family: &str, x: f64, y: f64, z: f64, eta: Option<f64>, b0: Option<f64>) -> PyResult<f64> {
    let m = model(family, eta, b0)?;
    let rule = WRule::new(QuadConfig { s_nodes: 64, theta_nodes: 64, x_nodes: 16 }).map_err(py_err)?;
    w_quadrature(&m, x, y, z, &rule).map_err(py_err)
}

/// INI text of a simulation preset.
#[pyfunction]
fn preset_config(name: &str) -> PyResult<String> {
    match config::preset(name).map_err(py_err)? {
        Preset::Simulation(c) => Ok(config::to_config_string(&c)),
        _ => Err(PyValueError::new_err(format!("preset `{name}` is not a simulation"))),
    }
}

/// Run the simulation described by INI text; returns columns, rows and the summary.
#[pyfunction]
fn simulate(py: Python<'_>, config_text: &str) -> PyResult<Py<PyAny>> {
    let cfg = config::parse_config_str(config_text).map_err(py_err)?;
    let series = py.detach(|| run(&cfg)).map_err(py_err)?;
    to_py(py, &serde_json::json!({ "columns": series.columns, "rows": series.rows, "summary": series.summary }))
}

/// Run a verification suite: "kernel", "collision", "condensation" or "all".
#[pyfunction]
#[pyo3(signature = (suite = "all", seed = 0, samples = None))]
fn verify(py: Python<'_>, suite: &str, seed: u64, samples: Option<usize>) -> PyResult<Py<PyAny>> {
    let suite: Suite = suite.parse().map_err(py_err)?;
    let report = py.detach(|| run_suite(suite, seed, samples)).map_err(py_err)?;
    to_py(py, &report)
}

#[pymodule]
fn bosecond_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(equilibrium, m)?)?;
    m.add_function(wrap_pyfunction!(kernel_w, m)?)?;
    m.add_function(wrap_pyfunction!(preset_config, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
