//! Python bindings for the memetrace engine.
//!
//! Structured results (events, reports) cross the boundary as plain
//! dicts and lists built from their JSON form.

use std::collections::BTreeSet;
use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use memetrace::amm::{AmmError, PoolState};
use memetrace::analytics;
use memetrace::classifier;
use memetrace::config::DetectorConfig;
use memetrace::extraction;
use memetrace::ingest::{load_dataset, DatasetPaths};
use memetrace::pipeline;
use memetrace::scenario::{self, ScenarioKind, ScenarioSpec};

fn to_py(err: memetrace::Error) -> PyErr {
    if err.is_input_error() {
        PyValueError::new_err(err.to_string())
    } else {
        PyRuntimeError::new_err(err.to_string())
    }
}

fn amm_err(err: AmmError) -> PyErr {
    PyValueError::new_err(err.to_string())
}

fn to_object<'py>(py: Python<'py>, value: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Constant-product pool. Swaps return `(amount, new_pool)` and leave `self` untouched.
#[pyclass(name = "Pool", frozen)]
struct Pool(PoolState);

#[pymethods]
impl Pool {
    #[new]
    #[pyo3(signature = (reserve_token, reserve_quote, fee=0.0))]
    fn new(reserve_token: f64, reserve_quote: f64, fee: f64) -> PyResult<Self> {
        PoolState::new(reserve_token, reserve_quote, fee).map(Pool).map_err(amm_err)
    }

    #[getter]
    fn reserve_token(&self) -> f64 {
        self.0.reserve_token()
    }

    #[getter]
    fn reserve_quote(&self) -> f64 {
        self.0.reserve_quote()
    }

    #[getter]
    fn fee(&self) -> f64 {
        self.0.fee_fraction()
    }

    #[getter]
    fn k(&self) -> f64 {
        self.0.k()
    }

    fn spot_price(&self) -> f64 {
        self.0.spot_price()
    }

    fn swap_quote_in(&self, quote_in: f64) -> PyResult<(f64, Pool)> {
        self.0.swap_quote_in(quote_in).map(|(a, p)| (a, Pool(p))).map_err(amm_err)
    }

    fn swap_token_in(&self, tokens_in: f64) -> PyResult<(f64, Pool)> {
        self.0.swap_token_in(tokens_in).map(|(a, p)| (a, Pool(p))).map_err(amm_err)
    }

    fn swap_exact_token_out(&self, tokens_out: f64) -> PyResult<(f64, Pool)> {
        self.0.swap_exact_token_out(tokens_out).map(|(a, p)| (a, Pool(p))).map_err(amm_err)
    }

    fn swap_exact_quote_out(&self, quote_out: f64) -> PyResult<(f64, Pool)> {
        self.0.swap_exact_quote_out(quote_out).map(|(a, p)| (a, Pool(p))).map_err(amm_err)
    }

    fn cost_to_multiply_price(&self, multiplier: f64) -> PyResult<f64> {
        self.0.cost_to_multiply_price(multiplier).map_err(amm_err)
    }

    fn tokens_to_divide_price(&self, divisor: f64) -> PyResult<f64> {
        self.0.tokens_to_divide_price(divisor).map_err(amm_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Pool(reserve_token={}, reserve_quote={}, fee={})",
            self.0.reserve_token(),
            self.0.reserve_quote(),
            self.0.fee_fraction()
        )
    }
}

#[pyclass(name = "KeywordModel", frozen)]
struct PyKeywordModel(classifier::KeywordModel);

#[pymethods]
impl PyKeywordModel {
    #[new]
    #[pyo3(signature = (corpus, stoplist=None, cutoff=None))]
    fn new(corpus: Vec<String>, stoplist: Option<Vec<String>>, cutoff: Option<usize>) -> PyResult<Self> {
        let stop: BTreeSet<String> = stoplist.unwrap_or_default().into_iter().collect();
        classifier::KeywordModel::build(&corpus, stop, cutoff).map(PyKeywordModel).map_err(to_py)
    }

    fn keywords(&self) -> Vec<String> {
        self.0.top_keywords().map(str::to_owned).collect()
    }

    fn is_meme(&self, name: &str) -> bool {
        classifier::classify_name(name, &self.0)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.0.write_csv(&path).map_err(to_py)
    }
}

#[pyfunction]
fn preprocess_name(name: &str) -> Vec<String> {
    classifier::preprocess_name(name)
}

#[pyfunction]
fn tfidf_rank(corpus: Vec<String>) -> Vec<(String, f64)> {
    classifier::tfidf_rank(&corpus)
}

#[pyfunction]
fn elbow_cutoff(scores: Vec<f64>) -> PyResult<usize> {
    classifier::elbow_cutoff(&scores).map_err(to_py)
}

/// Wilder RSI; warm-up positions are `None`.
#[pyfunction]
#[pyo3(signature = (closes, period=14))]
fn rsi(closes: Vec<f64>, period: usize) -> PyResult<Vec<Option<f64>>> {
    extraction::rsi(&closes, period).map_err(to_py)
}

/// Writes a labeled synthetic dataset to `out` and returns its labels.
#[pyfunction]
#[pyo3(signature = (kind, seed, out, tokens=10, days=90, params=None))]
fn simulate<'py>(
    py: Python<'py>,
    kind: &str,
    seed: u64,
    out: PathBuf,
    tokens: usize,
    days: u32,
    params: Option<std::collections::BTreeMap<String, f64>>,
) -> PyResult<Bound<'py, PyAny>> {
    let kind: ScenarioKind = kind.parse().map_err(to_py)?;
    let mut spec = ScenarioSpec::new(kind, seed, days, tokens);
    spec.params = params.unwrap_or_default();
    let output = py.detach(|| scenario::generate(&spec)).map_err(to_py)?;
    output.write(&out).map_err(to_py)?;
    to_object(py, &output.labels)
}

/// Loads a dataset directory and runs the selected detectors.
#[pyfunction]
#[pyo3(signature = (data, kind="all"))]
fn detect<'py>(py: Python<'py>, data: PathBuf, kind: &str) -> PyResult<Bound<'py, PyAny>> {
    let detectors = pipeline::parse_detectors(kind).map_err(to_py)?;
    let events = py
        .detach(|| {
            let (dataset, _) = load_dataset(&DatasetPaths::in_dir(&data))?;
            Ok::<_, memetrace::Error>(pipeline::detect_all(&dataset, &detectors, &DetectorConfig::default()).events)
        })
        .map_err(to_py)?;
    to_object(py, &events)
}

#[pyfunction]
#[pyo3(signature = (data, t0, window_days=None))]
fn returns<'py>(py: Python<'py>, data: PathBuf, t0: i64, window_days: Option<i64>) -> PyResult<Bound<'py, PyAny>> {
    let (dataset, _) = load_dataset(&DatasetPaths::in_dir(&data)).map_err(to_py)?;
    let mut cfg = DetectorConfig::default().returns;
    if let Some(days) = window_days {
        cfg.window_days = days;
    }
    to_object(py, &analytics::compute_returns(&dataset, t0, &cfg))
}

/// Prevalence report from a returns CSV and an events JSONL file.
#[pyfunction]
fn report<'py>(py: Python<'py>, events: PathBuf, returns: PathBuf) -> PyResult<Bound<'py, PyAny>> {
    let events = pipeline::read_events_jsonl(&events).map_err(to_py)?;
    let returns = analytics::read_returns_csv(&returns).map_err(to_py)?;
    to_object(py, &analytics::prevalence(&returns, &events))
}

#[pymodule]
fn memetrace_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Pool>()?;
    m.add_class::<PyKeywordModel>()?;
    m.add_function(wrap_pyfunction!(preprocess_name, m)?)?;
    m.add_function(wrap_pyfunction!(tfidf_rank, m)?)?;
    m.add_function(wrap_pyfunction!(elbow_cutoff, m)?)?;
    m.add_function(wrap_pyfunction!(rsi, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(detect, m)?)?;
    m.add_function(wrap_pyfunction!(returns, m)?)?;
    m.add_function(wrap_pyfunction!(report, m)?)?;
    Ok(())
}
