use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use sclift_core::abcode::{alist_string, AbBase};
use sclift_core::abscount::{count_abs_brute, count_abs_general, CountReport};
use sclift_core::coupler::{AssignmentMatrixBm, AssignmentSpec, CuttingVector, Mode, SCCodeSpec};
use sclift_core::optimize::{self as opt, Objective, SearchConfig};
use sclift_core::perm;
use sclift_core::windowed::{count_abs_windowed, count_abs_windowed_brute, WindowSpec};

fn err(e: sclift_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn parse_mode(mode: &str) -> PyResult<Mode> {
    match mode {
        "terminated" => Ok(Mode::Terminated),
        "tailbiting" => Ok(Mode::Tailbiting),
        other => Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
    }
}

/// Permutation of 0..n given by its images.
#[pyclass(name = "Permutation", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPermutation(perm::Permutation);

#[pymethods]
impl PyPermutation {
    #[new]
    fn new(images: Vec<usize>) -> PyResult<Self> {
        perm::Permutation::new(images).map(Self).map_err(err)
    }

    #[staticmethod]
    fn shift(n: usize, k: i64) -> Self {
        Self(perm::Permutation::shift(n, k))
    }

    #[getter]
    fn images(&self) -> Vec<usize> {
        self.0.images().to_vec()
    }

    fn apply(&self, x: usize) -> usize {
        self.0.apply(x)
    }

    /// `self` after `other`.
    fn compose(&self, other: &PyPermutation) -> PyResult<Self> {
        self.0.compose(&other.0).map(Self).map_err(err)
    }

    fn inverse(&self) -> Self {
        Self(self.0.inverse())
    }

    fn order(&self) -> u64 {
        self.0.order()
    }

    fn cycles(&self) -> Vec<Vec<usize>> {
        self.0.cycles()
    }

    fn __eq__(&self, other: &PyPermutation) -> bool {
        self.0 == other.0
    }

    fn __repr__(&self) -> String {
        format!("Permutation({:?})", self.0.images())
    }
}

/// A spatially coupled code on an array-based base matrix.
#[pyclass(name = "SCCode", frozen)]
struct PySCCode(SCCodeSpec);

impl PySCCode {
    fn build(p: usize, l: usize, assignment: AssignmentSpec, mode: &str, gamma: usize) -> PyResult<Self> {
        let mut spec = SCCodeSpec::ab(AbBase::new(gamma, p).map_err(err)?, l, assignment).map_err(err)?;
        spec.mode = parse_mode(mode)?;
        spec.validate().map_err(err)?;
        Ok(Self(spec))
    }
}

#[pymethods]
impl PySCCode {
    #[staticmethod]
    #[pyo3(signature = (p, l, xi, mode = "terminated"))]
    fn from_cutting_vector(p: usize, l: usize, xi: Vec<usize>, mode: &str) -> PyResult<Self> {
        let gamma = xi.len();
        let cv = CuttingVector::new(xi, p, false).map_err(err)?;
        Self::build(p, l, AssignmentSpec::CuttingVector(cv), mode, gamma)
    }

    /// `rows` is the gamma x p grid of memory indices.
    #[staticmethod]
    #[pyo3(signature = (rows, l, mode = "terminated"))]
    fn from_bm(rows: Vec<Vec<usize>>, l: usize, mode: &str) -> PyResult<Self> {
        let (gamma, p) = (rows.len(), rows.first().map_or(0, Vec::len));
        let bm = AssignmentMatrixBm::from_rows(rows).map_err(err)?;
        Self::build(p, l, AssignmentSpec::Bm(bm), mode, gamma)
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        SCCodeSpec::parse(text, None).map(Self).map_err(err)
    }

    fn to_text(&self) -> String {
        self.0.to_text()
    }

    #[getter]
    fn memory(&self) -> usize {
        self.0.m
    }

    #[getter]
    fn coupling_length(&self) -> usize {
        self.0.l
    }

    /// (rows, cols) of the binary parity-check matrix.
    fn shape(&self) -> PyResult<(usize, usize)> {
        let h = self.0.build_binary().map_err(err)?;
        Ok((h.rows(), h.cols()))
    }

    /// Row indices of the ones in each column.
    fn columns(&self) -> PyResult<Vec<Vec<usize>>> {
        let h = self.0.build_binary().map_err(err)?;
        Ok((0..h.cols()).map(|c| h.col(c).to_vec()).collect())
    }

    fn alist(&self) -> PyResult<String> {
        Ok(alist_string(&self.0.build_binary().map_err(err)?))
    }

    /// Absorbing-set count report; method is "line" or "brute".
    #[pyo3(signature = (method = "line"))]
    fn count<'py>(&self, py: Python<'py>, method: &str) -> PyResult<Bound<'py, PyAny>> {
        let spec = &self.0;
        let report: CountReport = py
            .detach(|| match method {
                "line" => count_abs_general(spec).map(Some),
                "brute" => count_abs_brute(spec).map(Some),
                _ => Ok(None),
            })
            .map_err(err)?
            .ok_or_else(|| PyValueError::new_err(format!("unknown method {method:?}")))?;
        to_py(py, &report)
    }

    /// Windowed count report; method is "class" or "brute".
    #[pyo3(signature = (s, memory = None, method = "class"))]
    fn window<'py>(&self, py: Python<'py>, s: usize, memory: Option<usize>, method: &str) -> PyResult<Bound<'py, PyAny>> {
        let w = WindowSpec::new(s, memory.unwrap_or(self.0.m)).map_err(err)?;
        let spec = &self.0;
        let report = py
            .detach(|| match method {
                "class" => count_abs_windowed(spec, &w).map(Some),
                "brute" => count_abs_windowed_brute(spec, &w).map(Some),
                _ => Ok(None),
            })
            .map_err(err)?
            .ok_or_else(|| PyValueError::new_err(format!("unknown method {method:?}")))?;
        to_py(py, &report)
    }

    fn __repr__(&self) -> String {
        format!("SCCode(L={}, m={}, J={})", self.0.l, self.0.m, self.0.j)
    }
}

fn objective(p: usize, l: usize, m: usize, window: Option<usize>) -> PyResult<Objective> {
    let obj = match window {
        None => Objective::full(p, l, m),
        Some(s) => Objective::windowed(p, l, WindowSpec::new(s, m).map_err(err)?),
    };
    obj.validate().map_err(err)?;
    Ok(obj)
}

/// Best cutting vector for memory 1; returns (xi, count report).
#[pyfunction]
#[pyo3(signature = (p, l, window = None))]
fn best_cutting_vector<'py>(
    py: Python<'py>,
    p: usize,
    l: usize,
    window: Option<usize>,
) -> PyResult<(Vec<usize>, Bound<'py, PyAny>)> {
    let obj = objective(p, l, 1, window)?;
    let (xi, report) = py.detach(|| opt::best_cutting_vector(&obj)).map_err(err)?;
    Ok((xi.xi().to_vec(), to_py(py, &report)?))
}

/// Search B_m grids; `config` uses the key=value text form.
#[pyfunction]
#[pyo3(signature = (p, l, m = 1, window = None, config = None, seed = None))]
fn optimize<'py>(
    py: Python<'py>,
    p: usize,
    l: usize,
    m: usize,
    window: Option<usize>,
    config: Option<&str>,
    seed: Option<u64>,
) -> PyResult<Bound<'py, PyAny>> {
    let obj = objective(p, l, m, window)?;
    let mut cfg = match config {
        Some(text) => SearchConfig::parse(text).map_err(err)?,
        None => SearchConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let result = py.detach(|| opt::optimize_bm(&obj, &cfg)).map_err(err)?;
    to_py(py, &result)
}

#[pymodule]
fn sclift(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPermutation>()?;
    m.add_class::<PySCCode>()?;
    m.add_function(wrap_pyfunction!(best_cutting_vector, m)?)?;
    m.add_function(wrap_pyfunction!(optimize, m)?)?;
    Ok(())
}
