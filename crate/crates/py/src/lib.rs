//! Python bindings for the placement engine.
//!
//! The module mirrors the CLI workflow: build a `Config` (defaults, file, or
//! `set(key, value)` overrides using the same keys as the config file), then
//! `solve` or `sweep`. Channel-level helpers are exposed for notebook-side
//! sanity checks and plots.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use skyplace_core::geometry;
use skyplace_core::radio;
use skyplace_core::scenario::runner::{self, threshold_ladder};
use skyplace_core::scenario::{Scenario, ScenarioConfig, ScenarioError};
use skyplace_core::selection::SolveMethod;

fn scenario_err(e: ScenarioError) -> PyErr {
    match e {
        ScenarioError::Config(c) => PyValueError::new_err(c.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn parse_method(method: &str) -> PyResult<SolveMethod> {
    match method {
        "lp" => Ok(SolveMethod::Lp),
        "brute" => Ok(SolveMethod::Brute),
        _ => Err(PyValueError::new_err(format!(
            "method must be `lp` or `brute`, got `{method}`"
        ))),
    }
}

/// Scenario configuration; keys and defaults match the config file format.
#[pyclass(name = "Config", skip_from_py_object)]
#[derive(Clone)]
struct PyConfig {
    inner: ScenarioConfig,
}

#[pymethods]
impl PyConfig {
    /// Reference defaults (114 m area, 4 regions, 5 users/region, ...).
    #[new]
    fn new() -> Self {
        Self {
            inner: ScenarioConfig::default(),
        }
    }

    /// Load a config file.
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: ScenarioConfig::load(path).map_err(|e| PyValueError::new_err(e.to_string()))?,
        })
    }

    /// Parse config text.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: ScenarioConfig::parse(text).map_err(|e| PyValueError::new_err(e.to_string()))?,
        })
    }

    /// Set one field by its config-file key, e.g. `set("seed", "7")`.
    fn set(&mut self, key: &str, value: &str) -> PyResult<()> {
        self.inner
            .set_key(key, value)
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    /// Validate cross-field consistency.
    fn validate(&self) -> PyResult<()> {
        self.inner
            .validate()
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    /// Canonical flat key-value rendering.
    fn to_text(&self) -> String {
        self.inner.canonical_string()
    }

    /// Hash of the canonical rendering (hex).
    fn hash(&self) -> String {
        self.inner.hash()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[getter]
    fn gamma_th_db(&self) -> f64 {
        self.inner.gamma_th_db
    }

    fn __repr__(&self) -> String {
        format!("Config(hash={})", self.inner.hash())
    }
}

/// Chosen placement: combination, positions, per-user SINRs, verdicts.
#[pyclass(name = "Placement", skip_from_py_object)]
#[derive(Clone)]
struct PyPlacement {
    #[pyo3(get)]
    method: String,
    #[pyo3(get)]
    combination: usize,
    #[pyo3(get)]
    feasible: bool,
    #[pyo3(get)]
    relaxation_gap: bool,
    #[pyo3(get)]
    min_sinr_db: f64,
    #[pyo3(get)]
    positions: Vec<(f64, f64, f64)>,
    #[pyo3(get)]
    sinrs_db: Vec<f64>,
    /// Nonzero relaxed selection weights as (index, weight), or None for the
    /// exhaustive method.
    #[pyo3(get)]
    selection_support: Option<Vec<(usize, f64)>>,
}

impl From<&runner::PlacementRecord> for PyPlacement {
    fn from(p: &runner::PlacementRecord) -> Self {
        Self {
            method: p.method.to_string(),
            combination: p.combination,
            feasible: p.feasible,
            relaxation_gap: p.relaxation_gap,
            min_sinr_db: p.min_sinr_db,
            positions: p.positions.iter().map(|q| (q.x, q.y, q.z)).collect(),
            sinrs_db: p.sinrs_db.clone(),
            selection_support: p
                .selection_support
                .as_ref()
                .map(|s| s.iter().map(|e| (e.index, e.weight)).collect()),
        }
    }
}

#[pymethods]
impl PyPlacement {
    fn __repr__(&self) -> String {
        format!(
            "Placement(method={}, combination={}, feasible={}, min_sinr_db={:.4})",
            self.method, self.combination, self.feasible, self.min_sinr_db
        )
    }
}

/// Full solve outcome.
#[pyclass(name = "RunResult")]
struct PyRunResult {
    #[pyo3(get)]
    placement: PyPlacement,
    #[pyo3(get)]
    seed: u64,
    #[pyo3(get)]
    config_hash: String,
    #[pyo3(get)]
    gamma_th_db: f64,
    #[pyo3(get)]
    combination_count: usize,
    #[pyo3(get)]
    feasible_count: usize,
    #[pyo3(get)]
    oracle_best_min_sinr_db: f64,
    /// Per-user (index, region, x, y, z).
    #[pyo3(get)]
    users: Vec<(usize, usize, f64, f64, f64)>,
    /// Stage wall-clock times in milliseconds.
    #[pyo3(get)]
    timing_ms: Vec<(String, f64)>,
}

#[pymethods]
impl PyRunResult {
    fn __repr__(&self) -> String {
        format!(
            "RunResult(feasible={}, feasible_count={}, combinations={})",
            self.placement.feasible, self.feasible_count, self.combination_count
        )
    }
}

/// One sweep row.
#[pyclass(name = "SweepRow", skip_from_py_object)]
#[derive(Clone)]
struct PySweepRow {
    #[pyo3(get)]
    threshold_db: f64,
    #[pyo3(get)]
    feasible: bool,
    #[pyo3(get)]
    relaxation_gap: bool,
    #[pyo3(get)]
    feasible_count: usize,
    #[pyo3(get)]
    min_sinr_db: f64,
    #[pyo3(get)]
    positions: Vec<(f64, f64, f64)>,
}

/// Run the full placement pipeline.
#[pyfunction]
#[pyo3(signature = (config, method = "lp"))]
fn solve(config: &PyConfig, method: &str) -> PyResult<PyRunResult> {
    let method = parse_method(method)?;
    let run = runner::run_solve(&config.inner, method).map_err(scenario_err)?;
    let a = &run.artifacts;
    Ok(PyRunResult {
        placement: PyPlacement::from(&a.placement),
        seed: a.seed,
        config_hash: a.config_hash.clone(),
        gamma_th_db: a.gamma_th_db,
        combination_count: a.combination_count,
        feasible_count: a.feasible_count,
        oracle_best_min_sinr_db: a.oracle_best_min_sinr_db,
        users: a
            .users
            .iter()
            .map(|u| (u.user_index, u.region, u.x, u.y, u.z))
            .collect(),
        timing_ms: vec![
            ("precompute".to_string(), run.timing.precompute_ms),
            ("sinr_build".to_string(), run.timing.sinr_build_ms),
            ("oracle".to_string(), run.timing.oracle_ms),
            ("solve".to_string(), run.timing.solve_ms),
            ("total".to_string(), run.timing.total_ms),
        ],
    })
}

/// One solve per threshold on an evenly spaced ladder (channels built once).
#[pyfunction]
#[pyo3(signature = (config, from_db, to_db, steps = 50))]
fn sweep(config: &PyConfig, from_db: f64, to_db: f64, steps: usize) -> PyResult<Vec<PySweepRow>> {
    let thresholds = threshold_ladder(from_db, to_db, steps);
    let run = runner::run_sweep(&config.inner, &thresholds).map_err(scenario_err)?;
    Ok(run
        .artifacts
        .rows
        .iter()
        .map(|r| PySweepRow {
            threshold_db: r.threshold_db,
            feasible: r.feasible,
            relaxation_gap: r.relaxation_gap,
            feasible_count: r.feasible_count,
            min_sinr_db: r.min_sinr_db,
            positions: r.positions.iter().map(|p| (p.x, p.y, p.z)).collect(),
        })
        .collect())
}

/// Combination count after regulatory filtering.
#[pyfunction]
fn combination_count(config: &PyConfig) -> PyResult<usize> {
    let scenario = Scenario::build(&config.inner).map_err(scenario_err)?;
    Ok(scenario.space.len())
}

/// Unit-norm array response toward `theta_rad`.
#[pyfunction]
#[pyo3(signature = (theta_rad, n, spacing_ratio = 0.5))]
fn steering_vector(theta_rad: f64, n: usize, spacing_ratio: f64) -> PyResult<Vec<Complex64>> {
    if n == 0 || spacing_ratio <= 0.0 {
        return Err(PyValueError::new_err("need n >= 1 and spacing_ratio > 0"));
    }
    Ok(skyplace_core::channel::steering_vector(
        theta_rad,
        &skyplace_core::channel::ArrayConfig::new(n, spacing_ratio),
    ))
}

/// Euclidean distance between two (x, y, z) points.
#[pyfunction]
fn distance(p: (f64, f64, f64), q: (f64, f64, f64)) -> f64 {
    geometry::distance(
        geometry::Point3::new(p.0, p.1, p.2),
        geometry::Point3::new(q.0, q.1, q.2),
    )
}

#[pyfunction]
fn db_to_linear(db: f64) -> f64 {
    radio::db_to_linear(db)
}

#[pyfunction]
fn linear_to_db(linear: f64) -> f64 {
    radio::linear_to_db(linear)
}

#[pyfunction]
fn dbm_to_mw(dbm: f64) -> f64 {
    radio::dbm_to_mw(dbm)
}

#[pymodule]
fn skyplace_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConfig>()?;
    m.add_class::<PyPlacement>()?;
    m.add_class::<PyRunResult>()?;
    m.add_class::<PySweepRow>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(combination_count, m)?)?;
    m.add_function(wrap_pyfunction!(steering_vector, m)?)?;
    m.add_function(wrap_pyfunction!(distance, m)?)?;
    m.add_function(wrap_pyfunction!(db_to_linear, m)?)?;
    m.add_function(wrap_pyfunction!(linear_to_db, m)?)?;
    m.add_function(wrap_pyfunction!(dbm_to_mw, m)?)?;
    Ok(())
}
