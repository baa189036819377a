//! Python bindings. Coordinates, instances and row indices are 0-based;
//! labels are 1-based as in class files.

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyString;

use dslab::agnostic::{agnostic_trials, PipelineSizes};
use dslab::algebra::{audit_theorem, check_spanning, AuditOptions, DEFAULT_MONOMIAL_BUDGET, DEFAULT_RANK_SEED};
use dslab::dims::{
    ds_dimension_with_budget, natarajan_dimension_with_budget, Dimension, ShatterWitness, WitnessFile,
    DEFAULT_SUBSET_BUDGET,
};
use dslab::learn::{loo_error as loo, oig_list_predict, pac_experiment as pac, SyntheticDistribution};
use dslab::oig::{max_density_subfamily, min_max_orientation, outdegrees, DEFAULT_SUBSET_CAP};
use dslab::{CoordSeq, Density, HypothesisClass, Label, LabeledSample, SearchMode, SearchOptions};

fn to_py_err(e: dslab::Error) -> PyErr {
    match e {
        dslab::Error::Io(io) => PyIOError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn json_err(e: serde_json::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Converts a serialized report into plain Python objects.
fn loads(py: Python<'_>, text: String) -> PyResult<Bound<'_, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

fn fraction(py: Python<'_>, d: Density) -> PyResult<Bound<'_, PyAny>> {
    py.import("fractions")?.getattr("Fraction")?.call1((d.numer(), d.denom()))
}

fn search(heuristic: bool, max_family: usize) -> SearchOptions {
    SearchOptions { mode: if heuristic { SearchMode::Heuristic } else { SearchMode::Exact }, subset_cap: max_family }
}

fn sample(points: Vec<(usize, Label)>) -> LabeledSample {
    LabeledSample::new(points)
}

/// A finite hypothesis class over `n` coordinates with labels in `1..=k`.
#[pyclass(name = "HypothesisClass", module = "dslab", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
pub struct PyHypothesisClass {
    inner: HypothesisClass,
}

#[pymethods]
impl PyHypothesisClass {
    #[new]
    fn new(k: Label, rows: Vec<Vec<Label>>) -> PyResult<Self> {
        let n = rows.first().map_or(0, Vec::len);
        HypothesisClass::new(k, n, rows).map(|inner| Self { inner }).map_err(to_py_err)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        dslab::load_class(path).map(|l| Self { inner: l.class }).map_err(to_py_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        HypothesisClass::from_json(text).map(|l| Self { inner: l.class }).map_err(to_py_err)
    }

    /// The product class `[k]^s × [ell]^(m-s)`.
    #[staticmethod]
    fn cube(k: Label, ell: Label, s: usize, m: usize) -> PyResult<Self> {
        dslab::gen_cube(k, ell, s, m).map(|inner| Self { inner }).map_err(to_py_err)
    }

    #[staticmethod]
    #[pyo3(signature = (k, n, size, seed = 0))]
    fn random(k: Label, n: usize, size: usize, seed: u64) -> PyResult<Self> {
        dslab::gen_random(k, n, size, seed).map(|inner| Self { inner }).map_err(to_py_err)
    }

    #[getter]
    fn k(&self) -> Label {
        self.inner.k()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn rows(&self) -> Vec<Vec<Label>> {
        self.inner.rows().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __contains__(&self, row: Vec<Label>) -> bool {
        self.inner.contains(&row)
    }

    fn __repr__(&self) -> String {
        format!("HypothesisClass(k={}, n={}, size={})", self.inner.k(), self.inner.n(), self.inner.len())
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.inner.save(path).map_err(to_py_err)
    }

    /// Projection onto a coordinate sequence; repeats are allowed.
    fn restrict(&self, coords: Vec<usize>) -> PyResult<Self> {
        let seq = CoordSeq::with_repeats(coords, self.inner.n()).map_err(to_py_err)?;
        self.inner.restrict(&seq).map(|inner| Self { inner }).map_err(to_py_err)
    }
}

impl From<HypothesisClass> for PyHypothesisClass {
    fn from(inner: HypothesisClass) -> Self {
        Self { inner }
    }
}

impl PyHypothesisClass {
    pub fn inner(&self) -> &HypothesisClass {
        &self.inner
    }
}

/// Density of the one-inclusion graph with list size `ell`.
#[pyfunction]
#[pyo3(signature = (h, ell = 1))]
fn density<'py>(py: Python<'py>, h: &PyHypothesisClass, ell: usize) -> PyResult<Bound<'py, PyAny>> {
    fraction(py, dslab::density(&h.inner, ell))
}

/// Densest subfamily: `(density, rows)`.
#[pyfunction]
#[pyo3(signature = (h, ell = 1, heuristic = false, max_family = DEFAULT_SUBSET_CAP))]
fn max_density<'py>(
    py: Python<'py>,
    h: &PyHypothesisClass,
    ell: usize,
    heuristic: bool,
    max_family: usize,
) -> PyResult<(Bound<'py, PyAny>, Vec<Vec<Label>>)> {
    let best = py.detach(|| max_density_subfamily(&h.inner, ell, search(heuristic, max_family))).map_err(to_py_err)?;
    Ok((fraction(py, best.value)?, best.class.rows().to_vec()))
}

fn mu_result<'py>(py: Python<'py>, res: dslab::oig::MuResult, n: usize) -> PyResult<Bound<'py, PyAny>> {
    let out = pyo3::types::PyDict::new(py);
    out.set_item("value", fraction(py, res.value)?)?;
    out.set_item("sequence", res.sequence(n))?;
    out.set_item("subfamily", res.subfamily.rows().to_vec())?;
    out.set_item("exact", res.exact)?;
    Ok(out.into_any())
}

/// Maximum ℓ-density over restrictions to coordinate sequences of length `n`.
#[pyfunction]
#[pyo3(signature = (h, n, ell = 1, heuristic = false, max_family = DEFAULT_SUBSET_CAP))]
fn mu<'py>(
    py: Python<'py>,
    h: &PyHypothesisClass,
    n: usize,
    ell: usize,
    heuristic: bool,
    max_family: usize,
) -> PyResult<Bound<'py, PyAny>> {
    if ell == 0 {
        return Err(PyValueError::new_err("list size must be at least 1"));
    }
    let res = py.detach(|| dslab::oig::mu(&h.inner, n, ell, search(heuristic, max_family))).map_err(to_py_err)?;
    mu_result(py, res, n)
}

/// As [`mu`], weighting each edge with at least two vertices by its size.
#[pyfunction]
#[pyo3(signature = (h, n, heuristic = false, max_family = DEFAULT_SUBSET_CAP))]
fn mu_prime<'py>(
    py: Python<'py>,
    h: &PyHypothesisClass,
    n: usize,
    heuristic: bool,
    max_family: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let res = py.detach(|| dslab::oig::mu_prime(&h.inner, n, search(heuristic, max_family))).map_err(to_py_err)?;
    mu_result(py, res, n)
}

fn dimension<'py>(py: Python<'py>, d: Dimension) -> PyResult<Bound<'py, PyAny>> {
    let out = pyo3::types::PyDict::new(py);
    out.set_item("value", d.value)?;
    out.set_item("exact", d.exact)?;
    match d.witness {
        Some(w) => out.set_item("witness", loads(py, serde_json::to_string(&w.to_file()).map_err(json_err)?)?)?,
        None => out.set_item("witness", py.None())?,
    }
    Ok(out.into_any())
}

#[pyfunction]
#[pyo3(signature = (h, ell = 1, budget = DEFAULT_SUBSET_BUDGET))]
fn ds_dimension<'py>(py: Python<'py>, h: &PyHypothesisClass, ell: usize, budget: u128) -> PyResult<Bound<'py, PyAny>> {
    let d = py.detach(|| ds_dimension_with_budget(&h.inner, ell, budget));
    dimension(py, d)
}

#[pyfunction]
#[pyo3(signature = (h, ell = 1, budget = DEFAULT_SUBSET_BUDGET))]
fn natarajan_dimension<'py>(
    py: Python<'py>,
    h: &PyHypothesisClass,
    ell: usize,
    budget: u128,
) -> PyResult<Bound<'py, PyAny>> {
    let d = py.detach(|| natarajan_dimension_with_budget(&h.inner, ell, budget));
    dimension(py, d)
}

#[pyfunction]
fn vc_dimension(h: &PyHypothesisClass) -> PyResult<usize> {
    dslab::dims::vc_dimension(&h.inner).map_err(to_py_err)
}

/// Re-checks a witness given as a dict or JSON text. Returns the reason it
/// fails, or `None` when it is valid.
#[pyfunction]
fn validate_witness(h: &PyHypothesisClass, witness: &Bound<'_, PyAny>) -> PyResult<Option<String>> {
    let text: String = if witness.is_instance_of::<PyString>() {
        witness.extract()?
    } else {
        witness.py().import("json")?.call_method1("dumps", (witness,))?.extract()?
    };
    let file: WitnessFile = serde_json::from_str(&text).map_err(json_err)?;
    let checked = ShatterWitness::from_file(file).and_then(|w| dslab::dims::validate_witness(&h.inner, &w));
    Ok(checked.err().map(|e| e.to_string()))
}

/// Min-max ℓ-orientation: `(t_star, outdegrees, orientation)`.
#[pyfunction]
#[pyo3(signature = (h, ell = 1))]
fn orient<'py>(py: Python<'py>, h: &PyHypothesisClass, ell: usize) -> PyResult<(usize, Vec<usize>, Bound<'py, PyAny>)> {
    if ell == 0 {
        return Err(PyValueError::new_err("list size must be at least 1"));
    }
    let graph = dslab::build_oig(&h.inner);
    let (sigma, t_star) = py.detach(|| min_max_orientation(&graph, ell));
    let degrees = outdegrees(&graph, &sigma).map_err(to_py_err)?;
    let file = serde_json::to_string(&sigma.to_file(&graph)).map_err(json_err)?;
    Ok((t_star, degrees, loads(py, file)?))
}

/// Whether the monomials with at most `s` high coordinates span all
/// functions on `h`; `s` defaults to the DS dimension.
#[pyfunction]
#[pyo3(signature = (h, ell = 1, s = None, budget = DEFAULT_MONOMIAL_BUDGET, seed = DEFAULT_RANK_SEED))]
fn spanning<'py>(
    py: Python<'py>,
    h: &PyHypothesisClass,
    ell: usize,
    s: Option<usize>,
    budget: u128,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let result = py.detach(|| {
        let s = s.unwrap_or_else(|| ds_dimension_with_budget(&h.inner, ell, DEFAULT_SUBSET_BUDGET).value);
        check_spanning(&h.inner, ell, s, budget, seed)
    });
    loads(py, serde_json::to_string(&result.map_err(to_py_err)?).map_err(json_err)?)
}

/// Full audit report as a dict; `n` defaults to the number of coordinates.
#[pyfunction]
#[pyo3(signature = (
    h, ell = 1, n = None, seed = DEFAULT_RANK_SEED, heuristic = false, max_family = DEFAULT_SUBSET_CAP,
    subset_budget = DEFAULT_SUBSET_BUDGET, monomial_budget = DEFAULT_MONOMIAL_BUDGET
))]
#[allow(clippy::too_many_arguments)]
fn audit<'py>(
    py: Python<'py>,
    h: &PyHypothesisClass,
    ell: usize,
    n: Option<usize>,
    seed: u64,
    heuristic: bool,
    max_family: usize,
    subset_budget: u128,
    monomial_budget: u128,
) -> PyResult<Bound<'py, PyAny>> {
    let opts = AuditOptions { search: search(heuristic, max_family), subset_budget, monomial_budget, seed };
    let report = py.detach(|| audit_theorem(&h.inner, ell, n.unwrap_or(h.inner.n()), &opts)).map_err(to_py_err)?;
    loads(py, serde_json::to_string(&report).map_err(json_err)?)
}

/// List predicted for instance `x` from labeled `(instance, label)` pairs.
#[pyfunction]
#[pyo3(signature = (h, train, x, ell = 1))]
fn predict(h: &PyHypothesisClass, train: Vec<(usize, Label)>, x: usize, ell: usize) -> PyResult<Vec<Label>> {
    oig_list_predict(&h.inner, &sample(train), x, ell).map(|l| l.labels().to_vec()).map_err(to_py_err)
}

#[pyfunction]
#[pyo3(signature = (h, sample_points, ell = 1))]
fn loo_error<'py>(
    py: Python<'py>,
    h: &PyHypothesisClass,
    sample_points: Vec<(usize, Label)>,
    ell: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let report = py.detach(|| loo(&h.inner, &sample(sample_points), ell)).map_err(to_py_err)?;
    let out = pyo3::types::PyDict::new(py);
    out.set_item("mistakes", report.mistakes)?;
    out.set_item("truth_outdegree", report.truth_outdegree)?;
    out.set_item("t_star", report.t_star)?;
    out.set_item("holds", report.holds())?;
    Ok(out.into_any())
}

/// Prefix-vote PAC experiment under the uniform distribution labeled by row `target`.
#[pyfunction]
#[pyo3(signature = (h, m, ell = 1, delta = 0.1, trials = 100, seed = 0, target = 0))]
#[allow(clippy::too_many_arguments)]
fn pac_experiment<'py>(
    py: Python<'py>,
    h: &PyHypothesisClass,
    m: usize,
    ell: usize,
    delta: f64,
    trials: usize,
    seed: u64,
    target: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let report = py
        .detach(|| {
            let dist = SyntheticDistribution::uniform_realizable(&h.inner, target)?;
            pac(&h.inner, &dist, ell, m, delta, trials, seed)
        })
        .map_err(to_py_err)?;
    loads(py, serde_json::to_string(&report).map_err(json_err)?)
}

/// Agnostic pipeline runs on the uniform distribution labeled by row
/// `target`, with each label replaced by a uniform other label at rate `noise`.
#[pyfunction]
#[pyo3(signature = (h, ell = 1, n1 = 200, t = 200, n3 = 800, noise = 0.1, delta = 0.1, trials = 1, seed = 0, target = 0))]
#[allow(clippy::too_many_arguments)]
fn agnostic<'py>(
    py: Python<'py>,
    h: &PyHypothesisClass,
    ell: usize,
    n1: usize,
    t: usize,
    n3: usize,
    noise: f64,
    delta: f64,
    trials: usize,
    seed: u64,
    target: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let summary = py
        .detach(|| {
            let n = h.inner.n();
            let instances: Vec<usize> = (0..n).collect();
            let weights = vec![1.0 / n as f64; n];
            let dist = SyntheticDistribution::noisy(&h.inner, target, &instances, &weights, noise)?;
            agnostic_trials(&h.inner, &dist, ell, PipelineSizes { n1, t, n3 }, delta, trials, seed, None)
        })
        .map_err(to_py_err)?;
    loads(py, serde_json::to_string(&summary).map_err(json_err)?)
}

#[pymodule]
#[pyo3(name = "dslab")]
pub fn dslab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyHypothesisClass>()?;
    m.add_function(wrap_pyfunction!(density, m)?)?;
    m.add_function(wrap_pyfunction!(max_density, m)?)?;
    m.add_function(wrap_pyfunction!(mu, m)?)?;
    m.add_function(wrap_pyfunction!(mu_prime, m)?)?;
    m.add_function(wrap_pyfunction!(ds_dimension, m)?)?;
    m.add_function(wrap_pyfunction!(natarajan_dimension, m)?)?;
    m.add_function(wrap_pyfunction!(vc_dimension, m)?)?;
    m.add_function(wrap_pyfunction!(validate_witness, m)?)?;
    m.add_function(wrap_pyfunction!(orient, m)?)?;
    m.add_function(wrap_pyfunction!(spanning, m)?)?;
    m.add_function(wrap_pyfunction!(audit, m)?)?;
    m.add_function(wrap_pyfunction!(predict, m)?)?;
    m.add_function(wrap_pyfunction!(loo_error, m)?)?;
    m.add_function(wrap_pyfunction!(pac_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(agnostic, m)?)?;
    Ok(())
}
