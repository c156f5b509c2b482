//! Python module `sdht`.
//!
//! Distributions, channels and schemes are classes; everything else is a
//! function returning plain Python values. Structured results come back as
//! dicts with the same fields as the JSON the CLI writes.

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

use sdht_core::channels::{self, Channel};
use sdht_core::engine::{self, DetectorSpec, KeyedScheme};
use sdht_core::lab::{self, RatioInstance};
use sdht_core::prob::{self, FiniteDistribution};
use sdht_core::psm::{self, TruthTable, VerifyMode};
use sdht_core::SdhtError;

create_exception!(sdht, SdhtCoreError, PyValueError, "Error raised by the sdht core library.");

fn err(e: SdhtError) -> PyErr {
    SdhtCoreError::new_err(e.to_string())
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn dists(class: Vec<PyRef<'_, Distribution>>) -> Vec<FiniteDistribution> {
    class.iter().map(|d| d.inner.clone()).collect()
}

#[pyclass(name = "Distribution", module = "sdht", frozen)]
pub struct Distribution {
    inner: FiniteDistribution,
}

#[pymethods]
impl Distribution {
    #[new]
    fn new(probs: Vec<f64>) -> PyResult<Self> {
        FiniteDistribution::new(probs).map(|inner| Self { inner }).map_err(err)
    }

    #[staticmethod]
    fn bernoulli(p: f64) -> PyResult<Self> {
        FiniteDistribution::bernoulli(p).map(|inner| Self { inner }).map_err(err)
    }

    #[staticmethod]
    fn uniform(m: usize) -> PyResult<Self> {
        FiniteDistribution::uniform(m).map(|inner| Self { inner }).map_err(err)
    }

    #[getter]
    fn probs(&self) -> Vec<f64> {
        self.inner.probs().to_vec()
    }

    #[getter]
    fn alphabet_size(&self) -> usize {
        self.inner.alphabet_size()
    }

    fn tv(&self, other: PyRef<'_, Distribution>) -> PyResult<f64> {
        prob::tv_distance(&self.inner, &other.inner).map_err(err)
    }

    /// Squared Hellinger distance, Σ(√p − √q)².
    fn hellinger_sq(&self, other: PyRef<'_, Distribution>) -> PyResult<f64> {
        prob::hellinger_sq(&self.inner, &other.inner).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.inner.alphabet_size()
    }

    fn __repr__(&self) -> String {
        format!("Distribution({:?})", self.inner.probs())
    }
}

#[pyclass(name = "Channel", module = "sdht", frozen)]
pub struct PyChannel {
    inner: Channel,
}

#[pymethods]
impl PyChannel {
    #[new]
    fn new(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        Channel::new(rows).map(|inner| Self { inner }).map_err(err)
    }

    #[staticmethod]
    fn identity(m: usize) -> PyResult<Self> {
        Channel::identity(m).map(|inner| Self { inner }).map_err(err)
    }

    #[getter]
    fn rows(&self) -> Vec<Vec<f64>> {
        self.inner.rows().to_vec()
    }

    #[getter]
    fn input_size(&self) -> usize {
        self.inner.input_size()
    }

    #[getter]
    fn output_size(&self) -> usize {
        self.inner.output_size()
    }

    fn push_forward(&self, mu: PyRef<'_, Distribution>) -> PyResult<Distribution> {
        channels::push_forward(&self.inner, &mu.inner).map(|inner| Distribution { inner }).map_err(err)
    }

    /// `self` applied after `inner`.
    fn after(&self, inner: PyRef<'_, PyChannel>) -> PyResult<PyChannel> {
        channels::compose(&self.inner, &inner.inner).map(|inner| PyChannel { inner }).map_err(err)
    }

    fn sort_by_likelihood_ratio(&self) -> PyResult<PyChannel> {
        channels::sort_by_likelihood_ratio(&self.inner).map(|inner| PyChannel { inner }).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Channel({:?})", self.inner.rows())
    }
}

#[pyclass(name = "Scheme", module = "sdht", frozen)]
pub struct Scheme {
    inner: KeyedScheme,
}

#[pymethods]
impl Scheme {
    /// One-bit-key scheme for H0 = {mu0, mu1} vs H1 = {mu2}.
    #[staticmethod]
    fn onebit(
        mu0: PyRef<'_, Distribution>,
        mu1: PyRef<'_, Distribution>,
        mu2: PyRef<'_, Distribution>,
        n: usize,
    ) -> PyResult<Self> {
        engine::build_onebit_scheme(&mu0.inner, &mu1.inner, &mu2.inner, n).map(|inner| Self { inner }).map_err(err)
    }

    /// Keyless scheme from a channel that sends each class to a single output law.
    #[staticmethod]
    fn separating(
        channel: PyRef<'_, PyChannel>,
        h0: Vec<PyRef<'_, Distribution>>,
        h1: Vec<PyRef<'_, Distribution>>,
        n: usize,
    ) -> PyResult<Self> {
        engine::build_prop1_scheme(&channel.inner, &dists(h0), &dists(h1), n).map(|inner| Self { inner }).map_err(err)
    }

    /// Keyless scheme with an explicit detector given as JSON,
    /// e.g. `{"name": "threshold", "symbol": 1, "threshold": 3}`.
    #[staticmethod]
    fn keyless(n: usize, channel: PyRef<'_, PyChannel>, detector_json: &str) -> PyResult<Self> {
        let detector: DetectorSpec =
            serde_json::from_str(detector_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
        KeyedScheme::keyless(n, channel.inner.clone(), detector).map(|inner| Self { inner }).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner: KeyedScheme = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        inner.validate().map_err(err)?;
        Ok(Self { inner })
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("scheme serializes")
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn key_bits(&self) -> u64 {
        self.inner.key_bits()
    }

    #[getter]
    fn comm_bits(&self) -> u64 {
        self.inner.comm_bits()
    }

    /// Exact (ε, δ) report as a dict.
    fn evaluate<'py>(
        &self,
        py: Python<'py>,
        h0: Vec<PyRef<'_, Distribution>>,
        h1: Vec<PyRef<'_, Distribution>>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let (h0, h1) = (dists(h0), dists(h1));
        let report = py.detach(|| engine::evaluate(&self.inner, &h0, &h1)).map_err(err)?;
        to_py(py, &report)
    }

    #[pyo3(signature = (h0, h1, trials = 10_000, seed = 0))]
    fn monte_carlo<'py>(
        &self,
        py: Python<'py>,
        h0: Vec<PyRef<'_, Distribution>>,
        h1: Vec<PyRef<'_, Distribution>>,
        trials: u64,
        seed: u64,
    ) -> PyResult<Bound<'py, PyAny>> {
        let (h0, h1) = (dists(h0), dists(h1));
        let report = py.detach(|| engine::monte_carlo_evaluate(&self.inner, &h0, &h1, trials, seed)).map_err(err)?;
        to_py(py, &report)
    }

    fn __repr__(&self) -> String {
        format!("Scheme(n={}, key_bits={}, comm_bits={})", self.inner.n, self.inner.key_bits(), self.inner.comm_bits())
    }
}

/// Witness dict if mu0, mu1, mu2 are collinear, else None.
#[pyfunction]
fn collinearity_check<'py>(
    py: Python<'py>,
    mu0: PyRef<'_, Distribution>,
    mu1: PyRef<'_, Distribution>,
    mu2: PyRef<'_, Distribution>,
) -> PyResult<Bound<'py, PyAny>> {
    let w = channels::collinearity_check(&mu0.inner, &mu1.inner, &mu2.inner).map_err(err)?;
    to_py(py, &w)
}

/// Binary channel merging {mu0, mu1} and separating mu2, with its margin.
#[pyfunction]
fn separating_channel(
    mu0: PyRef<'_, Distribution>,
    mu1: PyRef<'_, Distribution>,
    mu2: PyRef<'_, Distribution>,
) -> PyResult<(PyChannel, f64)> {
    let s = channels::separating_channel(&mu0.inner, &mu1.inner, &mu2.inner).map_err(err)?;
    Ok((PyChannel { inner: s.channel }, s.margin))
}

#[pyfunction]
fn hellinger_ratio<'py>(py: Python<'py>, theta: f64, a: f64, c: f64) -> PyResult<Bound<'py, PyAny>> {
    let inst = RatioInstance::new(theta, a, c).map_err(err)?;
    to_py(py, &lab::hellinger_ratio_f(&inst))
}

#[pyfunction]
fn ratio_limit(theta: f64) -> PyResult<f64> {
    lab::ratio_limit(theta).map_err(err)
}

#[pyfunction]
fn boundary_bound(theta: f64) -> f64 {
    lab::boundary_bound(theta)
}

#[pyfunction]
#[pyo3(signature = (theta, resolution = 400))]
fn sup_ratio_binary<'py>(py: Python<'py>, theta: f64, resolution: usize) -> PyResult<Bound<'py, PyAny>> {
    let sup = py.detach(|| lab::sup_ratio_binary(theta, resolution)).map_err(err)?;
    to_py(py, &sup)
}

#[pyfunction]
fn general_channel_ratio(channel: PyRef<'_, PyChannel>, theta: f64) -> PyResult<f64> {
    lab::general_channel_ratio(&channel.inner, theta).map_err(err)
}

#[pyfunction]
fn reduce_to_binary<'py>(py: Python<'py>, channel: PyRef<'_, PyChannel>, theta: f64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &lab::reduce_to_binary(&channel.inner, theta).map_err(err)?)
}

#[pyfunction]
fn tradeoff_audit<'py>(
    py: Python<'py>,
    channel: PyRef<'_, PyChannel>,
    theta: f64,
    n: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let w = channel.inner.clone();
    let audit = py.detach(|| lab::tradeoff_audit_channel(&w, theta, n)).map_err(err)?;
    to_py(py, &audit)
}

#[pyfunction]
fn hellinger_identity_check<'py>(py: Python<'py>, p: f64, q: f64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &lab::lemma1_identity_check(p, q).map_err(err)?)
}

fn verify_mode(mode: &str) -> PyResult<VerifyMode> {
    match mode {
        "exhaustive" => Ok(VerifyMode::Exhaustive),
        "sampled" => Ok(VerifyMode::Sampled),
        other => Err(PyValueError::new_err(format!("mode must be \"exhaustive\" or \"sampled\", got {other:?}"))),
    }
}

/// Verifies the two-party table protocol for `f(x, y) = values[x * sizes[1] + y]`.
#[pyfunction]
#[pyo3(signature = (sizes, values, mode = "exhaustive", trials = 10_000, seed = 0))]
fn psm_verify_table<'py>(
    py: Python<'py>,
    sizes: Vec<usize>,
    values: Vec<u8>,
    mode: &str,
    trials: u64,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let mode = verify_mode(mode)?;
    let f = TruthTable::new(sizes, values).map_err(err)?;
    let p = psm::fkn_two_party(&f).map_err(err)?;
    let report = py.detach(|| psm::psm_verify(&p, &f, mode, trials, seed)).map_err(err)?;
    to_py(py, &report)
}

fn program_case(kind: &str, n: usize) -> PyResult<(TruthTable, psm::GroupProgramProtocol)> {
    let (f, program) = match kind {
        "parity" => (TruthTable::parity(n), psm::counter_program(n, 2, &[1])),
        "majority_s3" => (TruthTable::majority(3), Ok(psm::majority3_program())),
        "majority_barrington" => (TruthTable::majority(3), psm::barrington_compile(&psm::BooleanFormula::majority3())),
        other => return Err(PyValueError::new_err(format!("unknown program {other:?}"))),
    };
    let protocol = psm::kilian_randomize(&program.map_err(err)?).map_err(err)?;
    Ok((f.map_err(err)?, protocol))
}

/// Verifies a randomized group-program protocol: "parity" (n parties),
/// "majority_s3" or "majority_barrington" (three parties).
#[pyfunction]
#[pyo3(signature = (kind, n = 3, mode = "exhaustive", trials = 10_000, seed = 0))]
fn psm_verify_program<'py>(
    py: Python<'py>,
    kind: &str,
    n: usize,
    mode: &str,
    trials: u64,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let mode = verify_mode(mode)?;
    let (f, p) = program_case(kind, n)?;
    let report = py.detach(|| psm::psm_verify(&p, &f, mode, trials, seed)).map_err(err)?;
    to_py(py, &report)
}

/// Runs a program protocol as a hypothesis-testing scheme and reports (ε, δ).
#[pyfunction]
#[pyo3(signature = (kind, n, h0, h1, trials = 10_000, seed = 0))]
fn psm_sdht<'py>(
    py: Python<'py>,
    kind: &str,
    n: usize,
    h0: Vec<PyRef<'_, Distribution>>,
    h1: Vec<PyRef<'_, Distribution>>,
    trials: u64,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let (f, p) = program_case(kind, n)?;
    let (h0, h1) = (dists(h0), dists(h1));
    let report = py.detach(|| psm::psm_to_sdht(&f, &p, &h0, &h1, trials, seed)).map_err(err)?;
    to_py(py, &report)
}

#[pymodule]
pub fn sdht(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SdhtCoreError", m.py().get_type::<SdhtCoreError>())?;
    m.add_class::<Distribution>()?;
    m.add_class::<PyChannel>()?;
    m.add_class::<Scheme>()?;
    m.add_function(wrap_pyfunction!(collinearity_check, m)?)?;
    m.add_function(wrap_pyfunction!(separating_channel, m)?)?;
    m.add_function(wrap_pyfunction!(hellinger_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(ratio_limit, m)?)?;
    m.add_function(wrap_pyfunction!(boundary_bound, m)?)?;
    m.add_function(wrap_pyfunction!(sup_ratio_binary, m)?)?;
    m.add_function(wrap_pyfunction!(general_channel_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(reduce_to_binary, m)?)?;
    m.add_function(wrap_pyfunction!(tradeoff_audit, m)?)?;
    m.add_function(wrap_pyfunction!(hellinger_identity_check, m)?)?;
    m.add_function(wrap_pyfunction!(psm_verify_table, m)?)?;
    m.add_function(wrap_pyfunction!(psm_verify_program, m)?)?;
    m.add_function(wrap_pyfunction!(psm_sdht, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
