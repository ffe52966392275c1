//! Python bindings for the `etsmc` simulator.

use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use etsmc::cli;
use etsmc::controller::{self, ControllerParams};
use etsmc::engine::{self, inter_event_stats, RunOutput, SimConfig};
use etsmc::graph::{build_topology, TopologyMatrices};
use etsmc::numeric::{self, DenseMatrix};
use etsmc::ScenarioPreset;

/// Resolves a preset name, a config file path or inline TOML text.
pub fn load_config(target: &str) -> Result<SimConfig, String> {
    if let Ok(p) = target.parse::<ScenarioPreset>() {
        return Ok(p.config());
    }
    if target.contains('[') {
        return cli::parse_config_str(target).map_err(|e| e.to_string());
    }
    cli::parse_config(target).map_err(|e| e.to_string())
}

fn matrix(rows: &[Vec<f64>]) -> PyResult<DenseMatrix> {
    DenseMatrix::from_rows(rows).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn pairs(values: &[numeric::Complex64]) -> Vec<(f64, f64)> {
    values.iter().map(|c| (c.re, c.im)).collect()
}

/// Graph matrices of a leader-follower network.
#[pyclass(name = "Topology", module = "etsmc_py", frozen)]
pub struct PyTopology {
    inner: TopologyMatrices,
}

#[pymethods]
impl PyTopology {
    #[new]
    fn new(adjacency: Vec<Vec<f64>>, pinning: Vec<f64>) -> PyResult<Self> {
        build_topology(&adjacency, &pinning)
            .map(|inner| Self { inner })
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[getter]
    fn n_followers(&self) -> usize {
        self.inner.n_followers
    }

    #[getter]
    fn adjacency(&self) -> Vec<Vec<f64>> {
        self.inner.adjacency.to_rows()
    }

    #[getter]
    fn pinning(&self) -> Vec<Vec<f64>> {
        self.inner.pinning.to_rows()
    }

    #[getter]
    fn degree(&self) -> Vec<Vec<f64>> {
        self.inner.degree.to_rows()
    }

    #[getter]
    fn laplacian(&self) -> Vec<Vec<f64>> {
        self.inner.laplacian.to_rows()
    }

    #[getter]
    fn grounded(&self) -> Vec<Vec<f64>> {
        self.inner.grounded.to_rows()
    }

    fn laplacian_eigenvalues(&self) -> PyResult<Vec<(f64, f64)>> {
        self.inner
            .laplacian_eigenvalues()
            .map(|v| pairs(&v))
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    fn lambda2(&self) -> PyResult<Option<f64>> {
        self.inner.lambda2().map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    fn has_leader_rooted_spanning_tree(&self) -> bool {
        self.inner.has_leader_rooted_spanning_tree()
    }

    fn is_balanced(&self) -> bool {
        self.inner.is_balanced()
    }

    fn grounded_inverse(&self) -> PyResult<Vec<Vec<f64>>> {
        self.inner
            .grounded_inverse()
            .map(|m| m.to_rows())
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        format!("Topology(n_followers={})", self.inner.n_followers)
    }
}

/// Result of one simulation run.
#[pyclass(name = "RunResult", module = "etsmc_py", frozen)]
pub struct PyRunResult {
    inner: RunOutput,
}

impl PyRunResult {
    fn column(&self, f: impl Fn(&engine::StepRecord) -> &[f64]) -> Vec<Vec<f64>> {
        let n = self.inner.trajectory.n_followers;
        (0..n)
            .map(|i| self.inner.trajectory.records.iter().map(|r| f(r)[i]).collect())
            .collect()
    }
}

#[pymethods]
impl PyRunResult {
    #[getter]
    fn dt(&self) -> f64 {
        self.inner.trajectory.dt
    }

    #[getter]
    fn t(&self) -> Vec<f64> {
        self.inner.trajectory.records.iter().map(|r| r.t).collect()
    }

    #[getter]
    fn x0(&self) -> Vec<f64> {
        self.inner.trajectory.leader_trace()
    }

    /// Follower states, one list per follower.
    #[getter]
    fn x(&self) -> Vec<Vec<f64>> {
        self.column(|r| &r.x)
    }

    #[getter]
    fn u(&self) -> Vec<Vec<f64>> {
        self.column(|r| &r.u)
    }

    #[getter]
    fn sigma(&self) -> Vec<Vec<f64>> {
        self.column(|r| &r.sigma)
    }

    #[getter]
    fn e(&self) -> Vec<Vec<f64>> {
        self.column(|r| &r.e)
    }

    #[getter]
    fn v(&self) -> Vec<f64> {
        self.inner.trajectory.records.iter().map(|r| r.v).collect()
    }

    /// Trigger instants, one list per follower.
    #[getter]
    fn events(&self) -> Vec<Vec<f64>> {
        self.inner
            .events
            .per_agent
            .iter()
            .map(|ev| ev.iter().map(|e| e.t).collect())
            .collect()
    }

    /// `(agent, count, min_T, mean_T, max_T)` per follower.
    fn inter_event_stats(&self) -> Vec<(usize, usize, Option<f64>, Option<f64>, Option<f64>)> {
        inter_event_stats(&self.inner.events)
            .into_iter()
            .map(|s| (s.agent, s.count, s.min, s.mean, s.max))
            .collect()
    }

    #[getter]
    fn lambda2(&self) -> Option<f64> {
        self.inner.diagnostics.lambda2
    }

    #[getter]
    fn warnings(&self) -> Vec<String> {
        self.inner.diagnostics.warnings.clone()
    }

    /// `(eta_measured, samples, violations)` per follower, `None` when the
    /// trace was too short.
    fn reaching(&self) -> Vec<Option<(f64, usize, usize)>> {
        self.inner
            .diagnostics
            .reaching
            .iter()
            .map(|r| r.as_ref().map(|r| (r.eta_measured, r.samples, r.violations.len())))
            .collect()
    }

    /// `(K, empirical supremum, adequate)`.
    fn gain(&self) -> (f64, f64, bool) {
        let g = &self.inner.diagnostics.gain;
        (g.k, g.supremum, g.adequate)
    }

    /// Writes trajectory.csv, events.csv and diagnostics.csv into `out_dir`.
    fn write_csv(&self, out_dir: PathBuf) -> PyResult<Vec<PathBuf>> {
        cli::emit_csv(&self.inner, out_dir).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    fn __len__(&self) -> usize {
        self.inner.trajectory.len()
    }
}

#[pyfunction]
fn presets() -> Vec<&'static str> {
    ScenarioPreset::ALL.iter().map(|p| p.name()).collect()
}

/// Config of a preset as TOML text.
#[pyfunction]
fn preset_config(name: &str) -> PyResult<String> {
    name.parse::<ScenarioPreset>()
        .map(|p| cli::to_toml(&p.config()))
        .map_err(PyValueError::new_err)
}

/// Runs a preset, a config file or inline TOML.
#[pyfunction]
#[pyo3(signature = (target, dt=None, t_end=None, seed=None, oracle_disturbance=false))]
fn run(
    py: Python<'_>,
    target: &str,
    dt: Option<f64>,
    t_end: Option<f64>,
    seed: Option<u64>,
    oracle_disturbance: bool,
) -> PyResult<PyRunResult> {
    let mut config = load_config(target).map_err(PyValueError::new_err)?;
    if let Some(dt) = dt {
        config.dt = dt;
    }
    if let Some(t_end) = t_end {
        config.t_end = t_end;
    }
    if let Some(seed) = seed {
        config.seed = seed;
    }
    config.oracle_disturbance |= oracle_disturbance;
    cli::validate_config(&config).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let out = py.detach(|| engine::run(&config)).map_err(|e| {
        if e.is_numeric_failure() {
            PyRuntimeError::new_err(e.to_string())
        } else {
            PyValueError::new_err(e.to_string())
        }
    })?;
    Ok(PyRunResult { inner: out })
}

#[pyfunction]
fn eigenvalues(matrix_rows: Vec<Vec<f64>>) -> PyResult<Vec<(f64, f64)>> {
    numeric::eigenvalues(&matrix(&matrix_rows)?)
        .map(|v| pairs(&v))
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pyfunction]
fn invert(matrix_rows: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
    numeric::invert(&matrix(&matrix_rows)?)
        .map(|m| m.to_rows())
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

/// `|γ1·e + γ2·ė²| - (c0 + c1·e^{-βt})`; an event fires when this is >= 0.
#[pyfunction]
#[pyo3(signature = (e, edot, t, gamma1=0.8, gamma2=0.8, c0=1e-4, c1=0.2499, beta=1.0))]
#[allow(clippy::too_many_arguments)]
fn trigger_value(e: f64, edot: f64, t: f64, gamma1: f64, gamma2: f64, c0: f64, c1: f64, beta: f64) -> f64 {
    let p = ControllerParams {
        gamma1,
        gamma2,
        c0,
        c1,
        beta,
        ..ControllerParams::paper(0)
    };
    controller::trigger_value(e, edot, t, &p)
}

#[pymodule]
fn etsmc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTopology>()?;
    m.add_class::<PyRunResult>()?;
    m.add_function(wrap_pyfunction!(presets, m)?)?;
    m.add_function(wrap_pyfunction!(preset_config, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(invert, m)?)?;
    m.add_function(wrap_pyfunction!(trigger_value, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn targets_resolve() {
        assert_eq!(load_config("consensus").unwrap(), ScenarioPreset::Consensus.config());
        let text = cli::to_toml(&ScenarioPreset::Formation.config());
        assert_eq!(load_config(&text).unwrap(), ScenarioPreset::Formation.config());
        assert!(load_config("/no/such/file.toml").is_err());
    }

    #[test]
    fn complex_pairs_keep_order() {
        let v = [numeric::Complex64::new(1.0, -2.0), numeric::Complex64::new(3.0, 0.0)];
        assert_eq!(pairs(&v), vec![(1.0, -2.0), (3.0, 0.0)]);
    }
}
