//! Python bindings: configurations, the certified solver, heuristics,
//! exact verification and the classical bounds.

use heilbronn_core::bnb::{self, BnBCertificate, SearchParams};
use heilbronn_core::bounds;
use heilbronn_core::corpus;
use heilbronn_core::geometry::{self, min_triangle_area, signed_area_of};
use heilbronn_core::heuristic;
use heilbronn_core::model::{build_baseline, build_final};
use heilbronn_core::structure::{self, ExactConfig, DEFAULT_COINC_TOL, DEFAULT_CRIT_TOL, DEFAULT_EDGE_TOL};
use num_traits::ToPrimitive;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Duration;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Points in the closed unit square, labelled 1..n.
#[pyclass(name = "Configuration", module = "heilbronn", from_py_object)]
#[derive(Clone)]
pub struct PyConfiguration {
    inner: geometry::Configuration,
}

#[pymethods]
impl PyConfiguration {
    #[new]
    fn new(points: Vec<(f64, f64)>) -> PyResult<Self> {
        Ok(PyConfiguration {
            inner: geometry::Configuration::new(points).map_err(err)?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn points(&self) -> Vec<(f64, f64)> {
        self.inner.points().to_vec()
    }

    fn min_area(&self) -> f64 {
        min_triangle_area(&self.inner).0
    }

    /// `(area, (i, j, k))` of a smallest triangle.
    fn min_triangle(&self) -> (f64, (usize, usize, usize)) {
        let (a, t) = min_triangle_area(&self.inner);
        (a, (t.0, t.1, t.2))
    }

    /// All triangle areas in increasing order.
    fn sorted_areas(&self) -> Vec<f64> {
        geometry::area_distribution(&self.inner).entries.iter().map(|e| e.1).collect()
    }

    /// `(level, multiplicity)` clusters of the sorted areas.
    #[pyo3(signature = (rel_gap = geometry::DEFAULT_CLUSTER_GAP))]
    fn clusters(&self, rel_gap: f64) -> PyResult<Vec<(f64, usize)>> {
        let c = geometry::cluster_areas(&geometry::area_distribution(&self.inner), rel_gap).map_err(err)?;
        Ok(c.into_iter().map(|c| (c.level, c.multiplicity)).collect())
    }

    /// Critical triangles, boundary incidences and coincidences as JSON.
    #[pyo3(signature = (z = None))]
    fn structure_json(&self, z: Option<f64>) -> PyResult<String> {
        let z = z.unwrap_or_else(|| self.min_area());
        let r = structure::extract_structure(&self.inner, z, DEFAULT_CRIT_TOL, DEFAULT_EDGE_TOL, DEFAULT_COINC_TOL)
            .map_err(err)?;
        Ok(r.to_json().to_string())
    }

    fn __len__(&self) -> usize {
        self.inner.n()
    }

    fn __repr__(&self) -> String {
        format!("Configuration(n={}, min_area={:.10})", self.inner.n(), self.min_area())
    }
}

/// Result of a branch-and-bound run.
#[pyclass(name = "Certificate", module = "heilbronn", skip_from_py_object)]
pub struct PyCertificate {
    inner: BnBCertificate,
}

#[pymethods]
impl PyCertificate {
    #[getter]
    fn z_lb(&self) -> f64 {
        self.inner.z_lb
    }

    #[getter]
    fn z_ub(&self) -> f64 {
        self.inner.z_ub
    }

    #[getter]
    fn gap(&self) -> f64 {
        self.inner.gap
    }

    #[getter]
    fn nodes(&self) -> u64 {
        self.inner.nodes
    }

    #[getter]
    fn wall_time(&self) -> f64 {
        self.inner.wall_time.as_secs_f64()
    }

    #[getter]
    fn termination(&self) -> String {
        self.inner.termination.to_string()
    }

    #[getter]
    fn incumbent(&self) -> PyConfiguration {
        PyConfiguration {
            inner: self.inner.incumbent.clone(),
        }
    }

    fn is_closed(&self) -> bool {
        self.inner.is_closed()
    }

    fn __repr__(&self) -> String {
        format!(
            "Certificate(z in [{:.10}, {:.10}], nodes={}, {})",
            self.inner.z_lb, self.inner.z_ub, self.inner.nodes, self.inner.termination
        )
    }
}

/// Heuristic warm start plus certified spatial branch-and-bound.
#[pyfunction]
#[pyo3(signature = (n, model = "final", eps = 1e-6, time_limit = None, node_limit = None, seed = 0, starts = 100, warm_start = None))]
#[allow(clippy::too_many_arguments)]
fn solve(
    py: Python<'_>,
    n: usize,
    model: &str,
    eps: f64,
    time_limit: Option<f64>,
    node_limit: Option<u64>,
    seed: u64,
    starts: usize,
    warm_start: Option<PyConfiguration>,
) -> PyResult<PyCertificate> {
    let m = match model {
        "baseline" => build_baseline(n).map_err(err)?,
        "final" => {
            let prev = match n {
                ..=4 => 0.5,
                _ => match corpus::get_entry(n - 1) {
                    Ok(e) if e.provenance == corpus::Provenance::ProvenOptimal => e.delta_f64(),
                    _ => bounds::roth_upper(n - 1).map_err(err)?.to_f64().unwrap_or(0.5),
                },
            };
            build_final(n, prev).map_err(err)?
        }
        other => return Err(PyValueError::new_err(format!("unknown model {other:?}"))),
    };
    let time_limit = match time_limit {
        Some(t) if !(t > 0.0 && t.is_finite()) => return Err(PyValueError::new_err("time_limit must be positive")),
        t => t.map(Duration::from_secs_f64),
    };
    let params = SearchParams {
        epsilon: eps,
        time_limit,
        node_limit,
        seed,
        ..Default::default()
    };
    let cert = py
        .detach(|| {
            let warm = match warm_start {
                Some(w) => w.inner,
                None => heuristic::multistart(n, starts, 50, &mut ChaCha8Rng::seed_from_u64(seed)).map_err(err)?,
            };
            bnb::solve(&m, &params, Some(&warm)).map_err(err)
        })?;
    Ok(PyCertificate { inner: cert })
}

/// Best of `starts` seeded random starts after local search.
#[pyfunction]
#[pyo3(signature = (n, starts = 100, sweeps = 50, seed = 0))]
fn multistart(n: usize, starts: usize, sweeps: usize, seed: u64) -> PyResult<PyConfiguration> {
    let c = heuristic::multistart(n, starts, sweeps, &mut ChaCha8Rng::seed_from_u64(seed)).map_err(err)?;
    Ok(PyConfiguration { inner: c })
}

#[pyfunction]
#[pyo3(signature = (config, sweeps = 50))]
fn local_search(config: &PyConfiguration, sweeps: usize) -> PyResult<PyConfiguration> {
    Ok(PyConfiguration {
        inner: heuristic::local_search(&config.inner, sweeps).map_err(err)?,
    })
}

#[pyfunction]
fn signed_area(p: (f64, f64), q: (f64, f64), r: (f64, f64)) -> f64 {
    signed_area_of(p, q, r)
}

/// Corpus entry `n` (3..16) as a floating configuration.
#[pyfunction]
fn corpus_entry(n: usize) -> PyResult<PyConfiguration> {
    Ok(PyConfiguration {
        inner: corpus::get_entry(n).map_err(err)?.configuration(),
    })
}

/// `(expression or None, float)` claimed value of corpus entry `n`.
#[pyfunction]
fn corpus_delta(n: usize) -> PyResult<(Option<String>, f64)> {
    let e = corpus::get_entry(n).map_err(err)?;
    Ok((e.exact().map(|x| x.delta.to_string()), e.delta_f64()))
}

/// Full corpus as JSON text.
#[pyfunction]
fn corpus_json() -> String {
    corpus::corpus_json().to_string()
}

/// Validation of corpus entry `n`: exact where closed forms exist,
/// numeric otherwise.
#[pyfunction]
fn verify_corpus(n: usize) -> PyResult<bool> {
    let e = corpus::get_entry(n).map_err(err)?;
    Ok(corpus::validate_entry(&e).passed)
}

/// Exact verification of a configuration JSON with an `exact` array and a
/// `delta` expression.
#[pyfunction]
fn verify_json(py: Python<'_>, text: &str) -> PyResult<bool> {
    let v: serde_json::Value = serde_json::from_str(text).map_err(err)?;
    let x = ExactConfig::from_json(&v).map_err(err)?;
    py.detach(|| Ok(structure::verify_exact(&x).map(|r| r.passed()).unwrap_or(false)))
}

/// `1/(n-2)` as `(numerator, denominator)`.
#[pyfunction]
fn roth_upper(n: usize) -> PyResult<(i64, i64)> {
    let r = bounds::roth_upper(n).map_err(err)?;
    Ok((r.numer().to_i64().unwrap_or(0), r.denom().to_i64().unwrap_or(0)))
}

#[pyfunction]
fn cpz_upper(n: usize) -> f64 {
    bounds::cpz_upper(n)
}

/// `(configuration, p, guarantee as "1/(2p^2)" text, guarantee holds)`.
#[pyfunction]
fn erdos(n: usize) -> PyResult<(PyConfiguration, u64, String, bool)> {
    let e = bounds::erdos_config(n).map_err(err)?;
    let ok = e.guarantee_holds();
    Ok((PyConfiguration { inner: e.config }, e.p, e.guarantee.to_string(), ok))
}

/// Rows `(n, best_known, roth, cpz)`.
#[pyfunction]
fn bound_table(n_lo: usize, n_hi: usize) -> PyResult<Vec<(usize, f64, f64, f64)>> {
    Ok(bounds::bound_table(n_lo, n_hi)
        .map_err(err)?
        .into_iter()
        .map(|r| (r.n, r.best_known, r.roth, r.cpz))
        .collect())
}

#[pymodule]
fn heilbronn(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConfiguration>()?;
    m.add_class::<PyCertificate>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(multistart, m)?)?;
    m.add_function(wrap_pyfunction!(local_search, m)?)?;
    m.add_function(wrap_pyfunction!(signed_area, m)?)?;
    m.add_function(wrap_pyfunction!(corpus_entry, m)?)?;
    m.add_function(wrap_pyfunction!(corpus_delta, m)?)?;
    m.add_function(wrap_pyfunction!(corpus_json, m)?)?;
    m.add_function(wrap_pyfunction!(verify_corpus, m)?)?;
    m.add_function(wrap_pyfunction!(verify_json, m)?)?;
    m.add_function(wrap_pyfunction!(roth_upper, m)?)?;
    m.add_function(wrap_pyfunction!(cpz_upper, m)?)?;
    m.add_function(wrap_pyfunction!(erdos, m)?)?;
    m.add_function(wrap_pyfunction!(bound_table, m)?)?;
    Ok(())
}
