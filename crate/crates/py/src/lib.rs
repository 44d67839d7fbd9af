//! Python bindings: instances, sketches, the estimator and the validation suites.

use std::collections::HashMap;

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use subsketch_core::harness::{self, EstimateOptions, Family, GeneratorSpec, Mode};
use subsketch_core::scheduler::{self, SolverStrategy};
use subsketch_core::{
    sketch_adaptive as core_adaptive, sketch_known_n, AdaptiveConfig, Error, KnownNConfig,
    Params, SamplerIndex, SketchInstance, WeightedSampler,
};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(msg) => PyOSError::new_err(msg),
        e if e.is_configuration() => PyValueError::new_err(e.to_string()),
        e => PyRuntimeError::new_err(e.to_string()),
    }
}

fn json_to_py<'py>(py: Python<'py>, value: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pyclass(name = "Instance", frozen)]
struct PyInstance {
    inner: subsketch_core::Instance,
}

#[pymethods]
impl PyInstance {
    #[new]
    fn new(times: Vec<f64>) -> PyResult<Self> {
        let inner = subsketch_core::Instance::new(times).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let inner = subsketch_core::Instance::load(path).map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Synthetic instance from a named family.
    #[staticmethod]
    #[pyo3(signature = (family, n, seed = 0, params = None))]
    fn generate(family: &str, n: usize, seed: u64, params: Option<HashMap<String, f64>>) -> PyResult<Self> {
        let mut spec = GeneratorSpec::new(Family::parse(family).map_err(to_py)?, n, seed);
        for (k, v) in params.unwrap_or_default() {
            spec = spec.with(&k, v).map_err(to_py)?;
        }
        Ok(Self {
            inner: spec.generate().map_err(to_py)?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn p_max(&self) -> f64 {
        self.inner.p_max()
    }

    #[getter]
    fn total(&self) -> f64 {
        self.inner.total()
    }

    fn times(&self) -> Vec<f64> {
        self.inner.times().to_vec()
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.inner.save(path).map_err(to_py)
    }

    fn __len__(&self) -> usize {
        self.inner.n()
    }

    fn __repr__(&self) -> String {
        format!("Instance(n={}, p_max={})", self.inner.n(), self.inner.p_max())
    }
}

#[pyclass(name = "Sketch", frozen)]
struct PySketch {
    inner: SketchInstance,
}

#[pymethods]
impl PySketch {
    /// `(interval, count, time)` per entry, largest time first.
    fn entries(&self) -> Vec<(usize, u64, f64)> {
        self.inner.entries().iter().map(|e| (e.interval, e.count, e.time)).collect()
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.inner.scheme().delta()
    }

    #[getter]
    fn anchor(&self) -> f64 {
        self.inner.scheme().anchor()
    }

    #[getter]
    fn total_jobs(&self) -> u64 {
        self.inner.total_jobs()
    }

    #[getter]
    fn total_time(&self) -> f64 {
        self.inner.total_time()
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Sketch(entries={}, jobs={})", self.inner.len(), self.inner.total_jobs())
    }
}

#[pyfunction]
fn deterministic_sketch(instance: &PyInstance, epsilon: f64) -> PyResult<PySketch> {
    let inner = scheduler::deterministic_sketch(&instance.inner, epsilon).map_err(to_py)?;
    Ok(PySketch { inner })
}

/// Known-n sketch; returns the sketch and the draws it cost.
#[pyfunction]
#[pyo3(signature = (instance, m, delta, gamma0 = 1.0 / 12.0, seed = 0, budget_scale = 1.0, max_draws = None))]
fn sketch_known(
    instance: &PyInstance,
    m: usize,
    delta: f64,
    gamma0: f64,
    seed: u64,
    budget_scale: f64,
    max_draws: Option<u64>,
) -> PyResult<(PySketch, u64)> {
    let mut config = KnownNConfig::new(instance.inner.n(), m, delta, gamma0)
        .and_then(|c| c.with_budget_scale(budget_scale))
        .map_err(to_py)?;
    if let Some(limit) = max_draws {
        config = config.with_max_draws(limit);
    }
    let mut sampler = SamplerIndex::build(&instance.inner, seed).map_err(to_py)?;
    let run = sketch_known_n(&mut sampler, &config).map_err(to_py)?;
    Ok((PySketch { inner: run.sketch }, sampler.draws_used()))
}

/// Sketch without knowing n; returns the sketch and the draws it cost.
#[pyfunction]
#[pyo3(signature = (instance, m, delta, gamma0 = 1.0 / 12.0, seed = 0, budget_scale = 1.0, max_draws = None))]
fn sketch_adaptive(
    instance: &PyInstance,
    m: usize,
    delta: f64,
    gamma0: f64,
    seed: u64,
    budget_scale: f64,
    max_draws: Option<u64>,
) -> PyResult<(PySketch, u64)> {
    let mut config = AdaptiveConfig::new(m, delta, gamma0)
        .and_then(|c| c.with_budget_scale(budget_scale))
        .map_err(to_py)?;
    if let Some(limit) = max_draws {
        config = config.with_max_draws(limit);
    }
    let mut sampler = SamplerIndex::build(&instance.inner, seed).map_err(to_py)?;
    let run = core_adaptive(&mut sampler, &config).map_err(to_py)?;
    Ok((PySketch { inner: run.sketch }, sampler.draws_used()))
}

#[pyfunction]
#[pyo3(signature = (sketch, m, epsilon, solver = "auto"))]
fn meta_approx(sketch: &PySketch, m: usize, epsilon: f64, solver: &str) -> PyResult<f64> {
    let strategy = SolverStrategy::parse(solver).map_err(to_py)?;
    Ok(scheduler::meta_approx(&sketch.inner, m, epsilon, strategy).map_err(to_py)?.t)
}

#[pyfunction]
fn exact_opt(times: Vec<f64>, m: usize) -> PyResult<f64> {
    scheduler::exact_opt(&times, m).map_err(to_py)
}

/// Full pipeline; returns the report as a dict, with the job-to-machine
/// assignment under `"assignment"` when `emit_schedule` is set.
#[pyfunction]
#[pyo3(signature = (
    instance, mode, m, epsilon, gamma0 = 1.0 / 12.0, seed = 0, validate = false,
    emit_schedule = false, sketch_delta = None, budget_scale = 1.0, max_draws = None,
    solver = "auto", source = "python"
))]
#[allow(clippy::too_many_arguments)]
fn estimate<'py>(
    py: Python<'py>,
    instance: &PyInstance,
    mode: &str,
    m: usize,
    epsilon: f64,
    gamma0: f64,
    seed: u64,
    validate: bool,
    emit_schedule: bool,
    sketch_delta: Option<f64>,
    budget_scale: f64,
    max_draws: Option<u64>,
    solver: &str,
    source: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let mut params = Params::new(m, epsilon, gamma0).map_err(to_py)?;
    if let Some(d) = sketch_delta {
        params = params.with_sketch_delta(d).map_err(to_py)?;
    }
    let mut options = EstimateOptions::new(Mode::parse(mode).map_err(to_py)?, params, seed);
    options.validate = validate;
    options.emit_schedule = emit_schedule;
    options.budget_scale = budget_scale;
    options.max_draws = max_draws;
    options.solver = SolverStrategy::parse(solver).map_err(to_py)?;
    let outcome = harness::run_estimate(&instance.inner, source, &options).map_err(to_py)?;
    let report = json_to_py(py, &outcome.report)?;
    if let Some(s) = &outcome.schedule {
        report.set_item("assignment", s.assignment().to_vec())?;
    }
    Ok(report)
}

/// Runs a validation suite; returns its summary as a dict.
#[pyfunction]
#[pyo3(signature = (suite, trials, seed = 0))]
fn validate_suite<'py>(py: Python<'py>, suite: &str, trials: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let summary = py
        .detach(|| harness::run_validation_suite(suite, trials, seed))
        .map_err(to_py)?;
    json_to_py(py, &summary)
}

#[pymodule]
fn subsketch(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyInstance>()?;
    m.add_class::<PySketch>()?;
    m.add_function(wrap_pyfunction!(deterministic_sketch, m)?)?;
    m.add_function(wrap_pyfunction!(sketch_known, m)?)?;
    m.add_function(wrap_pyfunction!(sketch_adaptive, m)?)?;
    m.add_function(wrap_pyfunction!(meta_approx, m)?)?;
    m.add_function(wrap_pyfunction!(exact_opt, m)?)?;
    m.add_function(wrap_pyfunction!(estimate, m)?)?;
    m.add_function(wrap_pyfunction!(validate_suite, m)?)?;
    Ok(())
}
