//! Python bindings. Runs are described by the same TOML documents the command-line tool reads.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyComplex, PyDict, PyList};

use srrwave::config::RunConfig;
use srrwave::elliptic::{self, EllipticModulus};
use srrwave::floquet::{classify, monodromy, stability_along_branch};
use srrwave::melnikov::{self, DriveSpec};
use srrwave::verify::acceptance;
use srrwave::wavesolver::{continue_branch, newton_solve, NewtonReport};
use srrwave::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Config(_) | Error::InvalidParameter(_) | Error::Domain(_) | Error::Incompatible(_) => {
            PyValueError::new_err(e.to_string())
        }
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn config(text: Option<&str>) -> PyResult<RunConfig> {
    RunConfig::from_toml(text.unwrap_or("")).map_err(py_err)
}

fn modulus(k: f64) -> PyResult<EllipticModulus> {
    EllipticModulus::new(k).map_err(py_err)
}

#[pyfunction]
fn complete_k(k: f64) -> PyResult<f64> {
    Ok(elliptic::complete_k(modulus(k)?))
}

#[pyfunction]
fn complete_e(k: f64) -> PyResult<f64> {
    Ok(elliptic::complete_e(modulus(k)?))
}

/// `(sn, cn, dn, am)` at `u` for modulus `k`.
#[pyfunction]
fn jacobi(u: f64, k: f64) -> PyResult<(f64, f64, f64, f64)> {
    let t = elliptic::jacobi(u, modulus(k)?).map_err(py_err)?;
    Ok((t.sn, t.cn, t.dn, t.am))
}

#[pyfunction]
fn homoclinic_threshold(beta: f64, omega: f64, delta: f64) -> PyResult<f64> {
    melnikov::damping_threshold_homoclinic(beta, omega, delta).map_err(py_err)
}

/// Homoclinic Melnikov function at phase `a`, in closed form or by quadrature.
#[pyfunction]
#[pyo3(signature = (beta, omega, gamma, delta, a, quadrature = false))]
fn melnikov_homoclinic(beta: f64, omega: f64, gamma: f64, delta: f64, a: f64, quadrature: bool) -> PyResult<f64> {
    let drive = DriveSpec::new(delta).map_err(py_err)?;
    let f = if quadrature { melnikov::melnikov_homoclinic_numeric } else { melnikov::melnikov_homoclinic_closed };
    f(beta, omega, gamma, drive, a).map_err(py_err)
}

fn solve(cfg: &RunConfig) -> PyResult<NewtonReport> {
    newton_solve(&cfg.initial_wave().map_err(py_err)?, &cfg.model, cfg.newton_options()).map_err(py_err)
}

/// Solves for one wave; returns `period`, `cos`, `sin`, `norm`, `residual` and `iterations`.
#[pyfunction]
#[pyo3(signature = (config = None))]
fn solve_wave<'py>(py: Python<'py>, config: Option<&str>) -> PyResult<Bound<'py, PyDict>> {
    let report = solve(&self::config(config)?)?;
    let d = PyDict::new(py);
    d.set_item("period", report.solution.period)?;
    d.set_item("cos", report.solution.cos.clone())?;
    d.set_item("sin", report.solution.sin.clone())?;
    d.set_item("norm", report.solution.norm())?;
    d.set_item("residual", report.residual)?;
    d.set_item("iterations", report.iterations)?;
    Ok(d)
}

/// Floquet multipliers of the configured wave; returns `multipliers`, `max_modulus`, `stable`.
#[pyfunction]
#[pyo3(signature = (config = None))]
fn floquet<'py>(py: Python<'py>, config: Option<&str>) -> PyResult<Bound<'py, PyDict>> {
    let cfg = self::config(config)?;
    let sol = solve(&cfg)?.solution;
    let opts = cfg.floquet_options();
    let coupling = cfg.coupling().map_err(py_err)?;
    let m = py.detach(|| monodromy(&sol, &cfg.model, &coupling, opts)).map_err(py_err)?;
    let v = classify(&m, opts.tolerance);
    let zs = PyList::empty(py);
    for z in &m.multipliers {
        zs.append(PyComplex::from_doubles(py, z.re, z.im))?;
    }
    let d = PyDict::new(py);
    d.set_item("multipliers", zs)?;
    d.set_item("max_modulus", v.max_modulus)?;
    d.set_item("stable", v.stable)?;
    Ok(d)
}

/// Continues the configured wave; returns `param`, `norm`, `fold`, `stable` lists and `folds`.
#[pyfunction]
#[pyo3(signature = (config = None))]
fn branch<'py>(py: Python<'py>, config: Option<&str>) -> PyResult<Bound<'py, PyDict>> {
    let cfg = self::config(config)?;
    let start = solve(&cfg)?.solution;
    let c = cfg.continuation;
    let branch = py
        .detach(|| {
            let b = continue_branch(&start, &cfg.model, c.parameter, (c.lower, c.upper), cfg.step_control())?;
            Ok(if c.stability { stability_along_branch(&b, &cfg.coupling()?, cfg.floquet_options()).branch } else { b })
        })
        .map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("param", branch.points.iter().map(|p| p.param).collect::<Vec<_>>())?;
    d.set_item("norm", branch.points.iter().map(|p| p.norm).collect::<Vec<_>>())?;
    d.set_item("fold", branch.points.iter().map(|p| p.fold).collect::<Vec<_>>())?;
    d.set_item("stable", branch.points.iter().map(|p| p.stable).collect::<Vec<_>>())?;
    d.set_item("folds", branch.folds.iter().map(|f| f.param).collect::<Vec<_>>())?;
    Ok(d)
}

/// Runs acceptance criteria (all when `ids` is empty); returns `(id, passed, detail)` tuples.
#[pyfunction]
#[pyo3(signature = (ids = Vec::new()))]
fn verify(py: Python<'_>, ids: Vec<usize>) -> PyResult<Vec<(usize, bool, String)>> {
    let ids: Vec<usize> = if ids.is_empty() { (1..=acceptance::COUNT).collect() } else { ids };
    if let Some(bad) = ids.iter().find(|&&i| i == 0 || i > acceptance::COUNT) {
        return Err(PyValueError::new_err(format!("no acceptance criterion {bad}")));
    }
    Ok(py.detach(|| ids.into_iter().map(acceptance::run).map(|o| (o.id, o.passed, o.detail)).collect()))
}

#[pymodule]
fn pysrrwave(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(complete_k, m)?)?;
    m.add_function(wrap_pyfunction!(complete_e, m)?)?;
    m.add_function(wrap_pyfunction!(jacobi, m)?)?;
    m.add_function(wrap_pyfunction!(homoclinic_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(melnikov_homoclinic, m)?)?;
    m.add_function(wrap_pyfunction!(solve_wave, m)?)?;
    m.add_function(wrap_pyfunction!(floquet, m)?)?;
    m.add_function(wrap_pyfunction!(branch, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
