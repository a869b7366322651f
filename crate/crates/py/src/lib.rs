//! Python bindings. Matrices cross the boundary as lists of row lists.

use ndarray::Array2;
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use netlsa::clustering::{self, KMeansOptions};
use netlsa::ingest::{self, ParseOptions, ProfileOptions};
use netlsa::lsa::{self, SvdOptions};
use netlsa::matrix::{CsrMatrix, Index};
use netlsa::pipeline::{self, PipelineConfig};
use netlsa::synth::{self, SynthSpec};
use netlsa::weighting::{self, LogBase};
use netlsa::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } | Error::Locked(_) => PyIOError::new_err(e.to_string()),
        Error::Svd(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn rows(m: &Array2<f64>) -> Vec<Vec<f64>> {
    m.rows().into_iter().map(|r| r.to_vec()).collect()
}

fn array(rows: Vec<Vec<f64>>) -> PyResult<Array2<f64>> {
    let n = rows.len();
    let d = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != d) {
        return Err(PyValueError::new_err("rows have different lengths"));
    }
    Array2::from_shape_vec((n, d), rows.into_iter().flatten().collect()).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(to_py)
}

/// Users × domains matrix of raw activity.
#[pyclass(name = "ProfileMatrix", frozen)]
struct PyProfile(netlsa::matrix::ProfileMatrix);

#[pymethods]
impl PyProfile {
    /// Builds a profile from dense rows. Zero cells are not stored.
    #[new]
    #[pyo3(signature = (values, users, domains, metric = "bytes"))]
    fn new(values: Vec<Vec<f64>>, users: Vec<String>, domains: Vec<String>, metric: &str) -> PyResult<Self> {
        let a = array(values)?;
        let triplets = a.indexed_iter().map(|((i, j), &v)| (i, j, v));
        let csr = CsrMatrix::from_triplets(users.len(), domains.len(), triplets).map_err(to_py)?;
        let users = Index::from_names(users).map_err(to_py)?;
        let domains = Index::from_names(domains).map_err(to_py)?;
        netlsa::matrix::ProfileMatrix::new(csr, users, domains, parse(metric)?)
            .map(Self)
            .map_err(to_py)
    }

    #[getter]
    fn users(&self) -> Vec<String> {
        self.0.users.names().to_vec()
    }

    #[getter]
    fn domains(&self) -> Vec<String> {
        self.0.domains.names().to_vec()
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        self.0.values.shape()
    }

    #[getter]
    fn nnz(&self) -> usize {
        self.0.values.nnz()
    }

    fn total(&self) -> f64 {
        self.0.values.sum()
    }

    fn get(&self, user: &str, domain: &str) -> Option<f64> {
        self.0.get(user, domain)
    }

    fn to_dense(&self) -> Vec<Vec<f64>> {
        rows(&self.0.values.to_dense())
    }

    fn __repr__(&self) -> String {
        let (r, c) = self.0.values.shape();
        format!("ProfileMatrix({r} users x {c} domains, nnz={})", self.0.values.nnz())
    }
}

/// Weighted users × domains matrix.
#[pyclass(name = "FeatureMatrix", frozen)]
struct PyFeatures(weighting::FeatureMatrix);

#[pymethods]
impl PyFeatures {
    #[getter]
    fn users(&self) -> Vec<String> {
        self.0.users.names().to_vec()
    }

    #[getter]
    fn domains(&self) -> Vec<String> {
        self.0.domains.names().to_vec()
    }

    #[getter]
    fn provenance(&self) -> &'static str {
        self.0.provenance.as_str()
    }

    #[getter]
    fn dropped_users(&self) -> Vec<String> {
        self.0.dropped_users.clone()
    }

    #[getter]
    fn negative_tf_fraction(&self) -> f64 {
        self.0.negative_tf_fraction
    }

    fn to_dense(&self) -> Vec<Vec<f64>> {
        rows(&self.0.values.to_dense())
    }

    fn __repr__(&self) -> String {
        format!(
            "FeatureMatrix({} users x {} domains, {})",
            self.0.n_users(),
            self.0.n_domains(),
            self.0.provenance.as_str()
        )
    }
}

/// Truncated SVD of a feature matrix.
#[pyclass(name = "LsaModel", frozen)]
struct PyLsa(lsa::LsaModel);

#[pymethods]
impl PyLsa {
    #[getter]
    fn rank(&self) -> usize {
        self.0.rank()
    }

    #[getter]
    fn sigma(&self) -> Vec<f64> {
        self.0.sigma.to_vec()
    }

    #[getter]
    fn u(&self) -> Vec<Vec<f64>> {
        rows(&self.0.u)
    }

    #[getter]
    fn v(&self) -> Vec<Vec<f64>> {
        rows(&self.0.v)
    }

    #[getter]
    fn method(&self) -> &'static str {
        self.0.method.as_str()
    }

    #[pyo3(signature = (scale = false))]
    fn user_features(&self, scale: bool) -> Vec<Vec<f64>> {
        rows(&self.0.user_features(scale))
    }

    fn reconstruct(&self) -> Vec<Vec<f64>> {
        rows(&self.0.reconstruct())
    }
}

#[pyclass(name = "Clustering", frozen)]
struct PyClustering(clustering::Clustering);

#[pymethods]
impl PyClustering {
    #[getter]
    fn k(&self) -> usize {
        self.0.k
    }

    #[getter]
    fn assignments(&self) -> Vec<usize> {
        self.0.assignments.clone()
    }

    #[getter]
    fn centroids(&self) -> Vec<Vec<f64>> {
        rows(&self.0.centroids)
    }

    #[getter]
    fn inertia(&self) -> f64 {
        self.0.inertia
    }

    fn sizes(&self) -> Vec<usize> {
        self.0.sizes()
    }
}

/// Reads a session CSV and aggregates it into a profile matrix.
#[pyfunction]
#[pyo3(signature = (path, metric = "bytes", fail_fast = false))]
fn build_profile(path: &str, metric: &str, fail_fast: bool) -> PyResult<PyProfile> {
    let file = std::fs::File::open(path).map_err(|e| PyIOError::new_err(format!("{path}: {e}")))?;
    let opts = ParseOptions {
        policy: if fail_fast {
            ingest::ErrorPolicy::FailFast
        } else {
            ingest::ErrorPolicy::SkipAndCount
        },
        ..Default::default()
    };
    let parsed = ingest::parse_sessions(std::io::BufReader::new(file), &opts).map_err(to_py)?;
    let profile = ingest::build_profile_matrix(
        &parsed.records,
        &ProfileOptions {
            metric: parse(metric)?,
            ..Default::default()
        },
    );
    Ok(PyProfile(profile))
}

#[pyfunction]
#[pyo3(signature = (profile, log_base = "natural"))]
fn tfidf(profile: &PyProfile, log_base: &str) -> PyResult<PyFeatures> {
    Ok(PyFeatures(weighting::tfidf(&profile.0, parse::<LogBase>(log_base)?)))
}

#[pyfunction]
fn row_normalize(profile: &PyProfile) -> PyFeatures {
    PyFeatures(weighting::row_normalize(&profile.0))
}

#[pyfunction]
#[pyo3(signature = (features, rank, method = "auto", seed = 0, oversampling = 10, power_iterations = 2))]
fn truncated_svd(
    py: Python<'_>,
    features: &PyFeatures,
    rank: usize,
    method: &str,
    seed: u64,
    oversampling: usize,
    power_iterations: usize,
) -> PyResult<PyLsa> {
    let opts = SvdOptions {
        method: parse(method)?,
        seed,
        oversampling,
        power_iterations,
        ..Default::default()
    };
    py.detach(|| lsa::truncated_svd(&features.0, rank, &opts).map(|m| m.canonicalize_signs()))
        .map(PyLsa)
        .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (points, k, restarts = 10, max_iter = 300, tol = 1e-6, seed = 0))]
fn kmeans(
    py: Python<'_>,
    points: Vec<Vec<f64>>,
    k: usize,
    restarts: usize,
    max_iter: usize,
    tol: f64,
    seed: u64,
) -> PyResult<PyClustering> {
    let points = array(points)?;
    let opts = KMeansOptions {
        restarts,
        max_iter,
        tol,
        seed,
    };
    py.detach(|| clustering::kmeans(points.view(), k, &opts))
        .map(PyClustering)
        .map_err(to_py)
}

/// Best inertia for each k in `k_min..=k_max`, as `(k, inertia)` pairs.
#[pyfunction]
#[pyo3(signature = (points, k_min, k_max, restarts = 10, seed = 0))]
fn sweep_k(py: Python<'_>, points: Vec<Vec<f64>>, k_min: usize, k_max: usize, restarts: usize, seed: u64) -> PyResult<Vec<(usize, f64)>> {
    let points = array(points)?;
    let opts = KMeansOptions {
        restarts,
        seed,
        ..Default::default()
    };
    py.detach(|| clustering::sweep_k(points.view(), k_min, k_max, &opts))
        .map(|s| s.into_iter().map(|e| (e.k, e.inertia)).collect())
        .map_err(to_py)
}

#[pyfunction]
fn adjusted_rand_index(a: Vec<usize>, b: Vec<usize>) -> PyResult<f64> {
    synth::adjusted_rand_index(&a, &b).map_err(to_py)
}

#[pyfunction]
fn purity(predicted: Vec<usize>, truth: Vec<usize>) -> PyResult<f64> {
    synth::purity(&predicted, &truth).map_err(to_py)
}

/// Generates a synthetic corpus from a TOML spec string. Writes the CSV
/// files when `out_dir` is given. Returns users, planted topics and the
/// session count.
#[pyfunction]
#[pyo3(signature = (spec_toml, out_dir = None))]
fn synth_generate<'py>(py: Python<'py>, spec_toml: &str, out_dir: Option<&str>) -> PyResult<Bound<'py, PyDict>> {
    let spec = SynthSpec::from_toml(spec_toml).map_err(to_py)?;
    let out = py.detach(|| synth::generate(&spec)).map_err(to_py)?;
    if let Some(dir) = out_dir {
        synth::write_output(std::path::Path::new(dir), &out).map_err(to_py)?;
    }
    let d = PyDict::new(py);
    d.set_item("users", out.truth.users)?;
    d.set_item("topics", out.truth.dominant)?;
    d.set_item("n_sessions", out.sessions.len())?;
    Ok(d)
}

fn config(toml_text: &str) -> PyResult<PipelineConfig> {
    toml::from_str(toml_text).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Runs the ingest command for a TOML pipeline config; returns the manifest as JSON.
#[pyfunction]
fn run_ingest(py: Python<'_>, config_toml: &str) -> PyResult<String> {
    let cfg = config(config_toml)?;
    let r = py.detach(|| pipeline::cmd_ingest(&cfg)).map_err(to_py)?;
    Ok(r.manifest.to_string())
}

/// Runs the cluster command for a TOML pipeline config; returns the manifest as JSON.
#[pyfunction]
fn run_cluster(py: Python<'_>, config_toml: &str) -> PyResult<String> {
    let cfg = config(config_toml)?;
    let r = py.detach(|| pipeline::cmd_cluster(&cfg)).map_err(to_py)?;
    Ok(r.manifest.to_string())
}

#[pymodule]
fn netlsa_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyProfile>()?;
    m.add_class::<PyFeatures>()?;
    m.add_class::<PyLsa>()?;
    m.add_class::<PyClustering>()?;
    m.add_function(wrap_pyfunction!(build_profile, m)?)?;
    m.add_function(wrap_pyfunction!(tfidf, m)?)?;
    m.add_function(wrap_pyfunction!(row_normalize, m)?)?;
    m.add_function(wrap_pyfunction!(truncated_svd, m)?)?;
    m.add_function(wrap_pyfunction!(kmeans, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_k, m)?)?;
    m.add_function(wrap_pyfunction!(adjusted_rand_index, m)?)?;
    m.add_function(wrap_pyfunction!(purity, m)?)?;
    m.add_function(wrap_pyfunction!(synth_generate, m)?)?;
    m.add_function(wrap_pyfunction!(run_ingest, m)?)?;
    m.add_function(wrap_pyfunction!(run_cluster, m)?)?;
    Ok(())
}
