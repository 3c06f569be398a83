//! Python bindings for the fogcache simulator.
//!
//! Exposes a small surface: the compression-rate formula, k-means
//! quantization, and full experiment runs returning summary statistics.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use fogcache::compress;
use fogcache::sim::{run_experiment, SimConfig};

fn to_py_err(e: fogcache::Error) -> PyErr {
    match e {
        fogcache::Error::Config(msg) => PyValueError::new_err(msg),
        fogcache::Error::InvalidParameter(msg) => PyValueError::new_err(msg),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

/// Model compression rate for n parameters stored at b bits when quantized
/// with a k-entry codebook.
#[pyfunction]
fn compression_rate(n: usize, b: u32, k: usize) -> PyResult<f64> {
    compress::compression_rate(n, b, k).map_err(to_py_err)
}

/// Quantize a float vector with deterministic k-means; returns
/// (centers, assignments).
#[pyfunction]
fn kmeans_quantize(data: Vec<f64>, k: usize) -> PyResult<(Vec<f64>, Vec<usize>)> {
    let cb = compress::kmeans_quantize(&data, k).map_err(to_py_err)?;
    Ok((cb.centroids, cb.indices))
}

/// Run one caching experiment from a TOML configuration string; returns a
/// dict of summary statistics. `seed` and `policy` override the config.
#[pyfunction]
#[pyo3(signature = (config_toml = None, seed = None, policy = None))]
fn run(
    py: Python<'_>,
    config_toml: Option<&str>,
    seed: Option<u64>,
    policy: Option<&str>,
) -> PyResult<Py<PyDict>> {
    let mut cfg = match config_toml {
        Some(text) => SimConfig::from_toml_str(text).map_err(to_py_err)?,
        None => SimConfig::default(),
    };
    if let Some(s) = seed {
        cfg.run.seed = s;
    }
    if let Some(p) = policy {
        cfg.run.policy = p.parse().map_err(to_py_err)?;
    }
    cfg.validate().map_err(to_py_err)?;
    let out = run_experiment(&cfg, cfg.run.seed).map_err(to_py_err)?;
    let s = &out.summary;
    let d = PyDict::new_bound(py);
    d.set_item("policy", &s.policy)?;
    d.set_item("seed", s.seed)?;
    d.set_item("slots_run", s.slots_run)?;
    d.set_item("warmup_slots", s.warmup_slots)?;
    d.set_item("total_requests", s.total_requests)?;
    d.set_item("hits", s.hits)?;
    d.set_item("hit_rate", s.hit_rate)?;
    d.set_item("local_serves", s.local_serves)?;
    d.set_item("neighbor_serves", s.neighbor_serves)?;
    d.set_item("cloud_serves", s.cloud_serves)?;
    d.set_item("avg_delay", s.avg_delay)?;
    d.set_item("mean_reward", s.mean_reward)?;
    d.set_item("periods_completed", s.periods_completed)?;
    d.set_item("uploaded_bits", s.uploaded_bits)?;
    Ok(d.into())
}

#[pymodule]
fn fogcache_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(compression_rate, m)?)?;
    m.add_function(wrap_pyfunction!(kmeans_quantize, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
