//! Python bindings for mellin-core.

use mellin_core as core;
use mellin_core::density::DensityConfig;
use mellin_core::verify::{verify_case, VerifyOptions};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: core::Error) -> PyErr {
    match e {
        core::Error::Domain(_)
        | core::Error::InvalidModel(_)
        | core::Error::PatternMismatch(_)
        | core::Error::OutOfStrip { .. }
        | core::Error::DimensionMismatch { .. }
        | core::Error::NotSpd(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn json_err(e: serde_json::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "PathwayModel", module = "mellin", frozen, from_py_object)]
#[derive(Clone)]
struct PyModel(core::PathwayModel);

#[pymethods]
impl PyModel {
    #[staticmethod]
    #[pyo3(signature = (alpha, a=1.0, delta=1.0))]
    fn gen_gamma(alpha: f64, a: f64, delta: f64) -> PyResult<Self> {
        core::PathwayModel::gen_gamma(alpha, a, delta).map(PyModel).map_err(err)
    }

    #[staticmethod]
    #[pyo3(signature = (alpha, beta, a=1.0, delta=1.0))]
    fn type1_beta(alpha: f64, beta: f64, a: f64, delta: f64) -> PyResult<Self> {
        core::PathwayModel::type1_beta(alpha, beta, a, delta).map(PyModel).map_err(err)
    }

    #[staticmethod]
    #[pyo3(signature = (alpha, beta, a=1.0, delta=1.0))]
    fn type2_beta(alpha: f64, beta: f64, a: f64, delta: f64) -> PyResult<Self> {
        core::PathwayModel::type2_beta(alpha, beta, a, delta).map(PyModel).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text).map(PyModel).map_err(json_err)
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.0).expect("model serializes")
    }

    #[getter]
    fn family(&self) -> String {
        self.0.family.to_string()
    }
    #[getter]
    fn alpha(&self) -> f64 {
        self.0.alpha
    }
    #[getter]
    fn beta(&self) -> Option<f64> {
        self.0.beta
    }
    #[getter]
    fn a(&self) -> f64 {
        self.0.a
    }
    #[getter]
    fn delta(&self) -> f64 {
        self.0.delta
    }

    fn pdf(&self, x: f64) -> f64 {
        self.0.pdf(x)
    }

    /// (lower, upper) of the Mellin strip.
    fn strip(&self) -> (f64, f64) {
        let s = self.0.strip();
        (s.lower, s.upper)
    }

    fn mellin_transform(&self) -> String {
        self.0.mellin_transform().to_string()
    }

    /// E[x^(s-1)].
    fn mellin(&self, s: f64) -> PyResult<f64> {
        self.0.mellin_transform().eval(s).map_err(err)
    }

    #[pyo3(signature = (n, seed=0))]
    fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        self.0.sample(seed, n)
    }

    fn __repr__(&self) -> String {
        format!("PathwayModel({})", self.0)
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

#[pyclass(name = "ConvolutionSpec", module = "mellin", frozen, from_py_object)]
#[derive(Clone)]
struct PySpec(core::ConvolutionSpec);

#[pymethods]
impl PySpec {
    /// u = x1·x2.
    #[staticmethod]
    fn product(f1: &PyModel, f2: &PyModel) -> Self {
        PySpec(core::ConvolutionSpec::product(f1.0, f2.0))
    }

    /// u = x2/x1.
    #[staticmethod]
    fn ratio(f1: &PyModel, f2: &PyModel) -> Self {
        PySpec(core::ConvolutionSpec::ratio(f1.0, f2.0))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text).map(PySpec).map_err(json_err)
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.0).expect("spec serializes")
    }

    #[getter]
    fn kind(&self) -> &'static str {
        match self.0.kind {
            core::Kind::Product => "product",
            core::Kind::Ratio => "ratio",
        }
    }

    /// Catalog case id, if the spec fits one.
    #[getter]
    fn case(&self) -> Option<String> {
        core::detect_case(&self.0).map(|c| c.to_string())
    }

    fn support_upper(&self) -> f64 {
        self.0.support_upper()
    }

    fn transform(&self) -> PyResult<String> {
        self.0.transform().map(|e| e.to_string()).map_err(err)
    }

    /// The strip of the transform of u.
    fn strip(&self) -> PyResult<(f64, f64)> {
        let e = self.0.transform().map_err(err)?;
        Ok((e.strip.lower, e.strip.upper))
    }

    fn h_function(&self) -> PyResult<String> {
        self.0.transform().map(|e| e.to_h_function().to_string()).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("ConvolutionSpec({})", self.to_json())
    }
}

fn result_dict<'py>(py: Python<'py>, r: &core::EvalResult) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("value", r.value)?;
    d.set_item("error", r.error)?;
    d.set_item("backend", r.backend.to_string())?;
    d.set_item("fallback", r.diagnostics.fallback.clone())?;
    Ok(d)
}

/// Density of u with one backend: series, quad, contour, mc or auto.
#[pyfunction]
#[pyo3(signature = (spec, u, backend="series", seed=0, mc_samples=200_000))]
fn density<'py>(
    py: Python<'py>,
    spec: &PySpec,
    u: f64,
    backend: &str,
    seed: u64,
    mc_samples: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let choice: core::BackendChoice = backend.parse().map_err(err)?;
    let cfg = DensityConfig { seed, mc_samples, ..Default::default() };
    let r = py.detach(|| core::density(&spec.0, u, choice, &cfg)).map_err(err)?;
    result_dict(py, &r)
}

/// The catalog closed form of a case.
#[pyfunction]
fn eval_case<'py>(py: Python<'py>, case: &str, spec: &PySpec, u: f64) -> PyResult<Bound<'py, PyDict>> {
    let c: core::CaseId = case.parse().map_err(err)?;
    let r = core::eval_case(c, &spec.0, u).map_err(err)?;
    result_dict(py, &r)
}

/// Cross-backend verification of one case; returns the JSON report.
#[pyfunction]
#[pyo3(signature = (case, seed=0, quick=true))]
fn verify(py: Python<'_>, case: &str, seed: u64, quick: bool) -> PyResult<String> {
    let c: core::CaseId = case.parse().map_err(err)?;
    let base = if quick { VerifyOptions::quick() } else { VerifyOptions::default() };
    let opts = VerifyOptions { seed, ..base };
    let rep = py.detach(|| verify_case(c, &opts));
    Ok(serde_json::to_string(&rep).expect("report serializes"))
}

#[pyfunction]
fn log_gamma(x: f64) -> PyResult<f64> {
    core::log_gamma(x).map_err(err)
}

/// pFq(a; b; z).
#[pyfunction]
#[pyo3(signature = (a, b, z, tol=1e-12, max_terms=10_000))]
fn hyp_series(a: Vec<f64>, b: Vec<f64>, z: f64, tol: f64, max_terms: usize) -> PyResult<f64> {
    core::hyp_series(&core::HypSeriesSpec::new(&a, &b, z), tol, max_terms).map(|r| r.value).map_err(err)
}

#[pyfunction]
fn multivariate_gamma(alpha: f64, p: usize) -> PyResult<f64> {
    core::matrix::multivariate_gamma(alpha, p).map_err(err)
}

/// Samples of u for the spec.
#[pyfunction]
#[pyo3(signature = (spec, n, seed=0))]
fn sample_convolution(py: Python<'_>, spec: &PySpec, n: usize, seed: u64) -> Vec<f64> {
    py.detach(|| core::sample_convolution(&spec.0, seed, n))
}

#[pymodule]
fn mellin(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModel>()?;
    m.add_class::<PySpec>()?;
    m.add_function(wrap_pyfunction!(density, m)?)?;
    m.add_function(wrap_pyfunction!(eval_case, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(log_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(hyp_series, m)?)?;
    m.add_function(wrap_pyfunction!(multivariate_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(sample_convolution, m)?)?;
    m.add("CASES", core::CaseId::ALL.iter().map(|c| c.to_string()).collect::<Vec<_>>())?;
    Ok(())
}
