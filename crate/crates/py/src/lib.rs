//! Python bindings: `gmopg.Distribution`, `gmopg.fit`, `gmopg.compare` and
//! the descriptive / TTT / simulation helpers.

use gmopg::inference::{self, LifetimeDistribution, ModelKind, OptimizerSettings};
use gmopg::properties;
use gmopg::simulation::{self, StudyOptions};
use gmopg::{BaselineSpec, GmopgParams};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn value_error(e: gmopg::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn make_params(
    theta: f64,
    alpha: f64,
    lambda: f64,
    beta: f64,
    shape: Option<f64>,
) -> PyResult<GmopgParams> {
    let baseline = match shape {
        Some(shape) => BaselineSpec::weibull(beta, shape),
        None => BaselineSpec::exponential(beta),
    }
    .map_err(value_error)?;
    GmopgParams::new(theta, alpha, lambda, baseline).map_err(value_error)
}

fn parse_model(tag: &str) -> PyResult<ModelKind> {
    tag.parse::<ModelKind>()
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

/// A GMOP-G distribution with exponential (default) or Weibull baseline.
#[pyclass(name = "Distribution", module = "gmopg", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyDistribution {
    inner: GmopgParams,
}

#[pymethods]
impl PyDistribution {
    #[new]
    #[pyo3(signature = (theta, alpha, lambda_, beta, shape=None))]
    fn new(theta: f64, alpha: f64, lambda_: f64, beta: f64, shape: Option<f64>) -> PyResult<Self> {
        Ok(PyDistribution {
            inner: make_params(theta, alpha, lambda_, beta, shape)?,
        })
    }

    #[getter]
    fn theta(&self) -> f64 {
        self.inner.theta
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }

    #[getter]
    fn lambda_(&self) -> f64 {
        self.inner.lambda
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.baseline.rate()
    }

    #[getter]
    fn shape(&self) -> Option<f64> {
        match self.inner.baseline {
            BaselineSpec::Weibull { shape, .. } => Some(shape),
            BaselineSpec::Exponential { .. } => None,
        }
    }

    #[getter]
    fn baseline(&self) -> &'static str {
        self.inner.baseline.name()
    }

    fn pdf(&self, t: f64) -> f64 {
        self.inner.pdf(t)
    }

    fn cdf(&self, t: f64) -> f64 {
        self.inner.cdf(t)
    }

    fn sf(&self, t: f64) -> f64 {
        self.inner.sf(t)
    }

    fn hazard(&self, t: f64) -> f64 {
        self.inner.hazard(t)
    }

    fn quantile(&self, p: f64) -> PyResult<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(PyValueError::new_err(format!(
                "p must lie in [0, 1], got {p}"
            )));
        }
        Ok(self.inner.quantile(p))
    }

    /// pdf, cdf, sf and hazard on a list of points.
    fn evaluate<'py>(&self, py: Python<'py>, ts: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        d.set_item(
            "pdf",
            ts.iter().map(|&t| self.inner.pdf(t)).collect::<Vec<_>>(),
        )?;
        d.set_item(
            "cdf",
            ts.iter().map(|&t| self.inner.cdf(t)).collect::<Vec<_>>(),
        )?;
        d.set_item(
            "sf",
            ts.iter().map(|&t| self.inner.sf(t)).collect::<Vec<_>>(),
        )?;
        d.set_item(
            "hazard",
            ts.iter().map(|&t| self.inner.hazard(t)).collect::<Vec<_>>(),
        )?;
        d.set_item("t", ts)?;
        Ok(d)
    }

    #[pyo3(signature = (n, seed=0))]
    fn sample(&self, py: Python<'_>, n: usize, seed: u64) -> Vec<f64> {
        let p = self.inner;
        py.detach(move || p.sample(n, seed))
    }

    /// Mean, variance, skewness and kurtosis by quadrature.
    fn moments<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let p = self.inner;
        let m = py
            .detach(move || properties::moment_summary(&p))
            .map_err(value_error)?;
        let d = PyDict::new(py);
        d.set_item("mean", m.mean)?;
        d.set_item("variance", m.variance)?;
        d.set_item("skewness", m.skewness)?;
        d.set_item("kurtosis", m.kurtosis)?;
        Ok(d)
    }

    fn raw_moment(&self, s: u32) -> PyResult<f64> {
        properties::raw_moment(&self.inner, s).map_err(value_error)
    }

    fn renyi_entropy(&self, delta: f64) -> PyResult<f64> {
        properties::renyi_entropy(&self.inner, delta).map_err(value_error)
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        match p.baseline {
            BaselineSpec::Exponential { rate } => format!(
                "Distribution(theta={}, alpha={}, lambda_={}, beta={})",
                p.theta, p.alpha, p.lambda, rate
            ),
            BaselineSpec::Weibull { rate, shape } => format!(
                "Distribution(theta={}, alpha={}, lambda_={}, beta={}, shape={})",
                p.theta, p.alpha, p.lambda, rate, shape
            ),
        }
    }
}

/// Maximum-likelihood fit of one model.
#[pyclass(name = "FitResult", module = "gmopg", frozen)]
pub struct PyFitResult {
    inner: inference::FitResult,
}

#[pymethods]
impl PyFitResult {
    #[getter]
    fn model(&self) -> &'static str {
        self.inner.model.tag()
    }

    #[getter]
    fn estimates<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        for (name, v) in self.inner.parameter_names.iter().zip(&self.inner.estimates) {
            d.set_item(name.as_str(), *v)?;
        }
        Ok(d)
    }

    #[getter]
    fn standard_errors<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        for (name, v) in self
            .inner
            .parameter_names
            .iter()
            .zip(&self.inner.standard_errors)
        {
            d.set_item(name.as_str(), *v)?;
        }
        Ok(d)
    }

    #[getter]
    fn log_likelihood(&self) -> f64 {
        self.inner.log_likelihood
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn aic(&self) -> f64 {
        self.inner.criteria.aic
    }

    #[getter]
    fn bic(&self) -> f64 {
        self.inner.criteria.bic
    }

    #[getter]
    fn caic(&self) -> f64 {
        self.inner.criteria.caic
    }

    #[getter]
    fn hqic(&self) -> f64 {
        self.inner.criteria.hqic
    }

    #[getter]
    fn ks(&self) -> f64 {
        self.inner.gof.ks
    }

    #[getter]
    fn ks_p_value(&self) -> f64 {
        self.inner.gof.ks_p_value
    }

    #[getter]
    fn anderson_darling(&self) -> f64 {
        self.inner.gof.anderson_darling
    }

    #[getter]
    fn cramer_von_mises(&self) -> f64 {
        self.inner.gof.cramer_von_mises
    }

    #[getter]
    fn converged(&self) -> bool {
        self.inner.convergence.converged
    }

    /// The fitted GMOP-G distribution, or None for the moment-exponential model.
    fn distribution(&self) -> Option<PyDistribution> {
        match self.inner.distribution {
            LifetimeDistribution::Gmopg(p) => Some(PyDistribution { inner: p }),
            LifetimeDistribution::MomentExponential { .. } => None,
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "FitResult(model={:?}, log_likelihood={}, aic={}, converged={})",
            self.inner.model.tag(),
            self.inner.log_likelihood,
            self.inner.criteria.aic,
            self.inner.convergence.converged
        )
    }
}

fn settings(seed: u64, starts: usize) -> PyResult<OptimizerSettings> {
    if starts == 0 {
        return Err(PyValueError::new_err("starts must be at least 1"));
    }
    Ok(OptimizerSettings {
        seed,
        multistarts: starts,
        ..Default::default()
    })
}

/// Fits one model (tag such as "gmop-e", "exp", "mo-e").
#[pyfunction]
#[pyo3(signature = (data, model="gmop-e", seed=0, starts=16))]
fn fit(
    py: Python<'_>,
    data: Vec<f64>,
    model: &str,
    seed: u64,
    starts: usize,
) -> PyResult<PyFitResult> {
    let mut config = inference::ModelConfig::new(parse_model(model)?);
    config.optimizer = settings(seed, starts)?;
    let inner = py
        .detach(move || inference::fit(&data, &config))
        .map_err(value_error)?;
    Ok(PyFitResult { inner })
}

/// Fits several models and returns the successful fits sorted by AIC.
#[pyfunction]
#[pyo3(signature = (data, models=None, seed=0, starts=16))]
fn compare(
    py: Python<'_>,
    data: Vec<f64>,
    models: Option<Vec<String>>,
    seed: u64,
    starts: usize,
) -> PyResult<Vec<PyFitResult>> {
    let kinds = match models {
        Some(tags) => tags
            .iter()
            .map(|t| parse_model(t))
            .collect::<PyResult<Vec<_>>>()?,
        None => ModelKind::ALL
            .into_iter()
            .filter(|k| *k != ModelKind::GmopW)
            .collect(),
    };
    let settings = settings(seed, starts)?;
    let results = py.detach(move || inference::compare_models_with(&data, &kinds, &settings));
    let mut fits = Vec::new();
    for (_, r) in results {
        fits.push(r.map_err(value_error)?);
    }
    fits.sort_by(|a, b| a.criteria.aic.total_cmp(&b.criteria.aic));
    Ok(fits
        .into_iter()
        .map(|inner| PyFitResult { inner })
        .collect())
}

#[pyfunction]
fn descriptive<'py>(py: Python<'py>, data: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
    let s = inference::descriptive(&data).map_err(value_error)?;
    let d = PyDict::new(py);
    d.set_item("n", s.n)?;
    d.set_item("min", s.min)?;
    d.set_item("q1", s.q1)?;
    d.set_item("median", s.median)?;
    d.set_item("mean", s.mean)?;
    d.set_item("q3", s.q3)?;
    d.set_item("max", s.max)?;
    d.set_item("sd", s.sd)?;
    d.set_item("skewness", s.skewness)?;
    d.set_item("kurtosis", s.kurtosis)?;
    Ok(d)
}

/// Scaled total-time-on-test curve as (i/n, T(i/n)) pairs.
#[pyfunction]
fn ttt(data: Vec<f64>) -> PyResult<Vec<(f64, f64)>> {
    inference::ttt_curve(&data).map_err(value_error)
}

#[pyfunction]
fn information_criteria<'py>(
    py: Python<'py>,
    log_likelihood: f64,
    k: usize,
    n: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let c = inference::information_criteria(log_likelihood, k, n);
    let d = PyDict::new(py);
    d.set_item("aic", c.aic)?;
    d.set_item("bic", c.bic)?;
    d.set_item("caic", c.caic)?;
    d.set_item("hqic", c.hqic)?;
    Ok(d)
}

/// Monte Carlo bias/MSE study; returns one dict per (parameter, n) cell.
#[pyfunction]
#[pyo3(signature = (truth, sample_sizes, replicates, seed=0, diagnostic_truth=false, starts=16))]
fn simulate<'py>(
    py: Python<'py>,
    truth: &PyDistribution,
    sample_sizes: Vec<usize>,
    replicates: usize,
    seed: u64,
    diagnostic_truth: bool,
    starts: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let options = StudyOptions {
        diagnostic_truth,
        multistarts: starts.max(1),
        ..Default::default()
    };
    let params = truth.inner;
    let report = py
        .detach(move || {
            simulation::mc_study_with(&params, &sample_sizes, replicates, seed, &options)
        })
        .map_err(value_error)?;
    let cells = report
        .cells
        .iter()
        .map(|c| {
            let d = PyDict::new(py);
            d.set_item("parameter", c.parameter.as_str())?;
            d.set_item("n", c.n)?;
            d.set_item("truth", c.truth)?;
            d.set_item("bias", c.bias)?;
            d.set_item("mse", c.mse)?;
            d.set_item("converged", c.converged)?;
            d.set_item("failed", c.failed)?;
            d.set_item("flagged", c.flagged)?;
            Ok(d)
        })
        .collect::<PyResult<Vec<_>>>()?;
    let out = PyDict::new(py);
    out.set_item("cells", cells)?;
    out.set_item("trend_flag", report.trend_flag)?;
    Ok(out)
}

#[pymodule]
#[pyo3(name = "gmopg")]
fn gmopg_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyDistribution>()?;
    m.add_class::<PyFitResult>()?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(descriptive, m)?)?;
    m.add_function(wrap_pyfunction!(ttt, m)?)?;
    m.add_function(wrap_pyfunction!(information_criteria, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
