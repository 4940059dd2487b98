//! Python bindings: experiment runner and a few direct measurements.

use std::collections::HashMap;
use std::path::PathBuf;

use emlab::energy::energy_report;
use emlab::experiments::run::DISPERSION_PSI;
use emlab::experiments::{make_initial_data, run, DataSpec, ExperimentConfig, ExperimentKind};
use emlab::lab::dispersion::dispersion_sup as sup_at;
use emlab::propagator::eigenvalues;
use emlab::solver::integrate;
use emlab::{EmError, Grid, PhysParams, Solver};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyComplex, PyDict};

fn err(e: EmError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyfunction]
fn version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}

/// Canonical `key = value` text of the default configuration of `kind`.
#[pyfunction]
fn default_config(kind: &str) -> PyResult<String> {
    Ok(ExperimentConfig::for_kind(ExperimentKind::parse(kind).map_err(err)?).to_text())
}

/// Run one experiment; `settings` are `key = value` overrides.
#[pyfunction]
#[pyo3(signature = (kind, out, settings=None, seed=None, threads=1))]
fn run_experiment<'py>(
    py: Python<'py>,
    kind: &str,
    out: PathBuf,
    settings: Option<HashMap<String, String>>,
    seed: Option<u64>,
    threads: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let mut cfg = ExperimentConfig::for_kind(ExperimentKind::parse(kind).map_err(err)?);
    let mut keys: Vec<(String, String)> = settings.unwrap_or_default().into_iter().collect();
    keys.sort();
    for (k, v) in keys {
        cfg.set(&k, &v).map_err(err)?;
    }
    if seed.is_some() {
        cfg.data.seed = seed;
    }
    cfg.threads = threads;
    cfg.out = Some(out);
    let o = py.detach(|| run(&cfg)).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("out_dir", o.out_dir)?;
    d.set_item("ok", o.ok)?;
    d.set_item("message", o.message)?;
    d.set_item("files", o.files)?;
    Ok(d)
}

/// Energy balance of one random-smooth run on the `2 pi` torus.
#[pyfunction]
#[pyo3(signature = (n, c, sigma, dt, t_end, seed, cadence=10))]
fn energy_history<'py>(
    py: Python<'py>,
    n: usize,
    c: f64,
    sigma: f64,
    dt: f64,
    t_end: f64,
    seed: u64,
    cadence: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let rep = py
        .detach(|| -> emlab::Result<_> {
            let g = Grid::new(n, 2.0 * std::f64::consts::PI)?;
            let p = PhysParams::new(c, sigma);
            let spec = DataSpec {
                seed: Some(seed),
                ..DataSpec::default()
            };
            let s0 = make_initial_data(&spec, &g, &p)?;
            let tr = integrate(&Solver::new(&g, &p, dt)?, &s0, t_end, cadence)?;
            energy_report(&tr, &p, &[])
        })
        .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("e0", rep.e0)?;
    d.set_item("dissipation_bound", rep.dissipation_bound)?;
    d.set_item("times", &rep.times)?;
    d.set_item("kinetic", &rep.kinetic)?;
    d.set_item("electric", &rep.electric)?;
    d.set_item("magnetic", &rep.magnetic)?;
    d.set_item("dissipation", &rep.dissipation)?;
    d.set_item("deficit", &rep.deficit)?;
    Ok(d)
}

/// Roots of `lambda^2 + alpha lambda + xi^2 = 0`.
#[pyfunction]
fn wave_eigenvalues<'py>(
    py: Python<'py>,
    xi: f64,
    alpha: f64,
) -> (Bound<'py, PyComplex>, Bound<'py, PyComplex>) {
    let (p, m) = eigenvalues(xi, alpha);
    (
        PyComplex::from_doubles(py, p.re, p.im),
        PyComplex::from_doubles(py, m.re, m.im),
    )
}

/// `(sup_x |I(t, x)|, |x| at the sup)` for the default radial test function.
#[pyfunction]
#[pyo3(signature = (t, alpha, tol=1e-6))]
fn dispersion_sup(t: f64, alpha: f64, tol: f64) -> PyResult<(f64, f64)> {
    let s = sup_at(t, alpha, &DISPERSION_PSI, tol).map_err(err)?;
    Ok((s.sup, s.rho))
}

#[pymodule]
fn emlab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(version, m)?)?;
    m.add_function(wrap_pyfunction!(default_config, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(energy_history, m)?)?;
    m.add_function(wrap_pyfunction!(wave_eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(dispersion_sup, m)?)?;
    Ok(())
}
