//! Python bindings. Structured results cross the boundary as JSON strings.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use smoothlab::approx::approx_curve;
use smoothlab::corpus::{corpus_entry, corpus_list, CorpusEntry};
use smoothlab::grid::{periodize, Exponent, GridFunction, SmoothnessOrder};
use smoothlab::moduli::{default_delta_grid, modulus_curve, Sampling};
use smoothlab::verify::{run_check, verify_all, CheckParams, Grids, PropertyId, VerifyConfig};

fn err(e: smoothlab::Error) -> PyErr {
    match e {
        smoothlab::Error::Hypothesis { .. } | smoothlab::Error::Parameter(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn exponent(p: f64) -> PyResult<Exponent> {
    Exponent::new(p).map_err(err)
}

fn sampled(f: &str, n: Option<usize>) -> PyResult<(CorpusEntry, GridFunction)> {
    let e = corpus_entry(f).map_err(err)?;
    let n = n.unwrap_or(if e.dim == 1 { 1024 } else { 256 });
    let g = e.grid(n).map_err(err)?;
    Ok((e.clone(), periodize(&e, g).map_err(err)?.function))
}

/// omega_alpha(f, delta)_p for a corpus entry on the standard direction design.
#[pyfunction]
#[pyo3(signature = (f, alpha, p, delta, n=None))]
fn modulus(f: &str, alpha: f64, p: f64, delta: f64, n: Option<usize>) -> PyResult<f64> {
    let (e, g) = sampled(f, n)?;
    let c = modulus_curve(&g, &[delta], SmoothnessOrder::new(alpha).map_err(err)?, exponent(p)?, &Sampling::standard(e.dim))
        .map_err(err)?;
    Ok(c.values[0])
}

/// Modulus curve as JSON; `deltas` defaults to the grid-derived delta grid.
#[pyfunction]
#[pyo3(signature = (f, alpha, p, deltas=None, n=None))]
fn curve(f: &str, alpha: f64, p: f64, deltas: Option<Vec<f64>>, n: Option<usize>) -> PyResult<String> {
    let (e, g) = sampled(f, n)?;
    let deltas = deltas.unwrap_or_else(|| default_delta_grid(g.grid()));
    let c = modulus_curve(&g, &deltas, SmoothnessOrder::new(alpha).map_err(err)?, exponent(p)?, &Sampling::standard(e.dim))
        .map_err(err)?;
    Ok(c.to_json())
}

/// Near-best approximation errors at bands 0, 1, 2, ..., 2^k_max as JSON.
#[pyfunction]
#[pyo3(signature = (f, p, k_max=6, n=None))]
fn approx(f: &str, p: f64, k_max: u32, n: Option<usize>) -> PyResult<String> {
    let (_, g) = sampled(f, n)?;
    Ok(approx_curve(&g, exponent(p)?, k_max).map_err(err)?.to_json())
}

/// One inequality check; returns the report as JSON.
#[pyfunction]
#[pyo3(signature = (property, f, p, alpha, n=None, q=None, gamma=None, variant=None))]
#[allow(clippy::too_many_arguments)]
fn verify(
    property: &str,
    f: &str,
    p: f64,
    alpha: f64,
    n: Option<usize>,
    q: Option<f64>,
    gamma: Option<f64>,
    variant: Option<&str>,
) -> PyResult<String> {
    let id: PropertyId = property.parse().map_err(err)?;
    let e = corpus_entry(f).map_err(err)?;
    let n = n.unwrap_or(if e.dim == 1 { 1024 } else { 256 });
    let mut params = CheckParams::new(f, n, p, alpha).map_err(err)?;
    if let Some(q) = q {
        params = params.q(q).map_err(err)?;
    }
    if let Some(g) = gamma {
        params = params.gamma(g);
    }
    if let Some(v) = variant {
        params = params.variant(v);
    }
    let grids = Grids::for_grid(&e.grid(n).map_err(err)?);
    Ok(run_check(id, &e, &params, &grids, None).map_err(err)?.to_json())
}

/// Summary of the quick (or full) check matrix as JSON.
#[pyfunction]
#[pyo3(signature = (quick=true))]
fn verify_matrix(py: Python<'_>, quick: bool) -> PyResult<String> {
    let cfg = VerifyConfig { quick, ..VerifyConfig::default() };
    let run = py.detach(|| verify_all(&corpus_list(), &cfg)).map_err(err)?;
    Ok(run.summary().to_json())
}

/// The function registry as JSON.
#[pyfunction]
fn corpus() -> String {
    serde_json::to_string(&corpus_list()).expect("corpus serializes")
}

#[pymodule]
fn pysmoothlab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(modulus, m)?)?;
    m.add_function(wrap_pyfunction!(curve, m)?)?;
    m.add_function(wrap_pyfunction!(approx, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(verify_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(corpus, m)?)?;
    Ok(())
}
