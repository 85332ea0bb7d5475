//! Python bindings: layouts, allocations, Monte-Carlo runs and the
//! verification suite.

use netmimo::allocation::{allocation_size, PolicyTag};
use netmimo::evaluation::{db_to_linear, dof_slope, simulate, Scenario, SimulationOptions};
use netmimo::experiment::{run_experiment as run_core, ExperimentConfig};
use netmimo::oracle::{verification_suite, VerifyOptions};
use netmimo::rng::{substream, Purpose};
use netmimo::topology::{self, NodeLayout, Point};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: netmimo::Error) -> PyErr {
    match e {
        netmimo::Error::InvalidArgument(_) | netmimo::Error::Config(_) | netmimo::Error::UnboundedRadius => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Parses `perfect`, `conventional`, `distance`, `uniform`, `cluster` or `zero`.
fn parse_policy(name: &str, alpha: f64, cluster_size: usize) -> Result<PolicyTag, String> {
    Ok(match name {
        "perfect" => PolicyTag::Perfect,
        "conventional" => PolicyTag::Conventional,
        "distance" => PolicyTag::Distance { alpha },
        "uniform" => PolicyTag::Uniform,
        "cluster" => PolicyTag::Cluster { size: cluster_size },
        "zero" => PolicyTag::Zero,
        other => return Err(format!("unknown policy '{other}'")),
    })
}

/// Node positions in the plane.
#[pyclass(name = "Layout", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyLayout {
    inner: NodeLayout,
}

#[pymethods]
impl PyLayout {
    #[new]
    fn new(points: Vec<(f64, f64)>) -> PyResult<Self> {
        let inner = NodeLayout::new(points.into_iter().map(|(x, y)| Point::new(x, y)).collect()).map_err(to_py)?;
        Ok(PyLayout { inner })
    }

    #[staticmethod]
    fn grid(side: usize) -> PyResult<Self> {
        Ok(PyLayout {
            inner: NodeLayout::grid(side).map_err(to_py)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (k, side, seed=1))]
    fn random(k: usize, side: f64, seed: u64) -> PyResult<Self> {
        let inner = NodeLayout::uniform_random(k, side, &mut substream(seed, Purpose::Layout, 0, 0)).map_err(to_py)?;
        Ok(PyLayout { inner })
    }

    fn positions(&self) -> Vec<(f64, f64)> {
        self.inner.positions().iter().map(|p| (p.x, p.y)).collect()
    }

    fn distances(&self) -> Vec<Vec<f64>> {
        let d = self.inner.distances();
        d.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Layout({} nodes)", self.inner.len())
    }
}

#[pyfunction]
fn cooperation_radius(gamma: f64) -> PyResult<f64> {
    topology::cooperation_radius(gamma).map_err(to_py)
}

#[pyfunction]
fn data_sharing_sets(layout: &PyLayout, gamma: f64) -> PyResult<Vec<Vec<usize>>> {
    topology::data_sharing_sets(&layout.inner, gamma).map_err(to_py)
}

/// Bit allocation of one policy; returns a dict with totals and the
/// per-TX matrices indexed `[j][k][i]`.
#[pyfunction]
#[pyo3(signature = (layout, gamma, snr_db, policy, alpha=1.0, cluster_size=4))]
fn allocation<'py>(
    py: Python<'py>,
    layout: &PyLayout,
    gamma: f64,
    snr_db: f64,
    policy: &str,
    alpha: f64,
    cluster_size: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let tag = parse_policy(policy, alpha, cluster_size).map_err(PyValueError::new_err)?;
    let scenario = Scenario::new(layout.inner.clone(), gamma).map_err(to_py)?;
    let alloc = scenario.allocation(tag, db_to_linear(snr_db)).map_err(to_py)?;
    let size = allocation_size(&alloc);
    let per_tx: Vec<Vec<Vec<f64>>> = alloc
        .per_tx()
        .iter()
        .map(|b| b.row_iter().map(|r| r.iter().copied().collect()).collect())
        .collect();
    let out = PyDict::new(py);
    out.set_item("policy", tag.name())?;
    out.set_item("total_bits", size.total_bits)?;
    out.set_item("prelog", size.prelog)?;
    out.set_item("prelog_asymptotic", size.prelog_asymptotic)?;
    out.set_item("per_tx", per_tx)?;
    Ok(out)
}

/// Coupled Monte-Carlo over policies and SNR points. Returns one dict per
/// curve with per-point averages and the fitted DoF slope.
#[pyfunction]
#[pyo3(signature = (layout, gamma, policies, snr_db, trials, seed=1, alphas=vec![1.0], cluster_size=4, data_mask=false, fit_points=4, workers=None))]
#[allow(clippy::too_many_arguments)]
fn run_simulation<'py>(
    py: Python<'py>,
    layout: &PyLayout,
    gamma: f64,
    policies: Vec<String>,
    snr_db: Vec<f64>,
    trials: usize,
    seed: u64,
    alphas: Vec<f64>,
    cluster_size: usize,
    data_mask: bool,
    fit_points: usize,
    workers: Option<usize>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let mut tags = Vec::new();
    for name in &policies {
        if name == "distance" {
            tags.extend(alphas.iter().map(|&alpha| PolicyTag::Distance { alpha }));
        } else {
            tags.push(parse_policy(name, 1.0, cluster_size).map_err(PyValueError::new_err)?);
        }
    }
    let scenario = Scenario::new(layout.inner.clone(), gamma)
        .and_then(|s| s.with_data_mask(data_mask))
        .map_err(to_py)?;
    let opts = SimulationOptions { trials, seed, workers };
    let sim = py.detach(|| simulate(&scenario, &tags, &snr_db, opts)).map_err(to_py)?;
    sim.rates
        .iter()
        .zip(&sim.deviations)
        .map(|(curve, dev)| {
            let d = PyDict::new(py);
            d.set_item("policy", curve.policy.name())?;
            d.set_item("alpha", curve.policy.alpha())?;
            d.set_item("snr_db", curve.points.iter().map(|p| p.snr_db).collect::<Vec<_>>())?;
            d.set_item("avg_rate", curve.points.iter().map(|p| p.avg_rate).collect::<Vec<_>>())?;
            d.set_item(
                "avg_stderr",
                curve.points.iter().map(|p| p.avg_stderr).collect::<Vec<_>>(),
            )?;
            d.set_item(
                "mean_rate",
                curve.points.iter().map(|p| p.mean_rate.clone()).collect::<Vec<_>>(),
            )?;
            d.set_item(
                "rejections",
                curve.points.iter().map(|p| p.rejections).collect::<Vec<_>>(),
            )?;
            d.set_item(
                "median_deviation",
                dev.points.iter().map(|p| p.median).collect::<Vec<_>>(),
            )?;
            d.set_item("dof_slope", dof_slope(curve, fit_points).ok().map(|e| e.avg_slope))?;
            Ok(d)
        })
        .collect()
}

/// Runs a TOML experiment config; returns `(rates_csv, metadata_toml)`.
#[pyfunction]
fn run_experiment(py: Python<'_>, config_toml: &str) -> PyResult<(String, String)> {
    let config = ExperimentConfig::from_toml_str(config_toml).map_err(to_py)?;
    let result = py.detach(|| run_core(&config)).map_err(to_py)?;
    Ok((result.rates_csv(), result.metadata_toml().map_err(to_py)?))
}

/// Preset config as TOML text.
#[pyfunction]
fn preset(name: &str) -> PyResult<String> {
    ExperimentConfig::preset(name)
        .ok_or_else(|| PyValueError::new_err(format!("unknown preset '{name}'")))?
        .to_toml_string()
        .map_err(to_py)
}

type CheckTuple = (String, f64, String, f64, bool);

/// Verification table as `(check, measured, relation, bound, passed)` tuples.
#[pyfunction]
#[pyo3(signature = (seed=1, trials=500, resolvent_pairs=1000))]
fn verify(py: Python<'_>, seed: u64, trials: usize, resolvent_pairs: usize) -> PyResult<Vec<CheckTuple>> {
    let rows = py
        .detach(|| {
            verification_suite(VerifyOptions {
                seed,
                trials,
                resolvent_pairs,
            })
        })
        .map_err(to_py)?;
    Ok(rows
        .into_iter()
        .map(|r| (r.name, r.measured, r.relation.to_string(), r.bound, r.pass))
        .collect())
}

#[pymodule]
fn netmimo_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLayout>()?;
    m.add_function(wrap_pyfunction!(cooperation_radius, m)?)?;
    m.add_function(wrap_pyfunction!(data_sharing_sets, m)?)?;
    m.add_function(wrap_pyfunction!(allocation, m)?)?;
    m.add_function(wrap_pyfunction!(run_simulation, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(preset, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
