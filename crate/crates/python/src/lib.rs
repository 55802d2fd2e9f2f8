//! Python bindings: groups from JSON specs, cup products, witnesses and
//! certificate checks.

use massey_core::certificate::{verify_certificate, Certificate, GroupSpec, Verdict};
use massey_core::cohomology::{cup, triviality_failure, CohClass1};
use massey_core::fp::Fp;
use massey_core::groups::EtypePresentation;
use massey_core::massey::{strong_vanishing_witness, SearchOptions, DEFAULT_BUDGET};
use massey_core::suites::{run_suite as core_run_suite, SuiteConfig};
use massey_core::unitriangular::{solve_commutator_equation as core_solve, UniTriangular};
use massey_core::Error;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

create_exception!(massey_py, TrivialityError, PyException);
create_exception!(massey_py, SearchExhausted, PyException);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::TrivialityFails { .. } => TrivialityError::new_err(e.to_string()),
        Error::SearchExhausted { .. } => SearchExhausted::new_err(e.to_string()),
        Error::Internal(_) | Error::Resource(_) => pyo3::exceptions::PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn classes(alphas: Vec<Vec<u32>>) -> Vec<CohClass1> {
    alphas.into_iter().map(CohClass1::new).collect()
}

/// An elementary-type pro-p group given by a JSON spec.
#[pyclass(name = "Group", frozen)]
struct PyGroup {
    inner: EtypePresentation,
}

#[pymethods]
impl PyGroup {
    #[new]
    fn new(spec_json: &str) -> PyResult<Self> {
        let inner = GroupSpec::from_json(spec_json).and_then(|s| s.build()).map_err(to_py)?;
        Ok(PyGroup { inner })
    }

    #[getter]
    fn p(&self) -> u32 {
        self.inner.p()
    }

    #[getter]
    fn generator_count(&self) -> usize {
        self.inner.generator_count()
    }

    #[getter]
    fn relators(&self) -> Vec<String> {
        self.inner.presentation().relator_strings()
    }

    #[getter]
    fn orientation(&self) -> Vec<u64> {
        self.inner.orientation().values.clone()
    }

    fn describe(&self) -> String {
        self.inner.describe()
    }

    fn spec_json(&self) -> String {
        GroupSpec::of(&self.inner).to_json()
    }

    /// Whether `a ⌣ b` vanishes.
    fn cup_is_zero(&self, a: Vec<u32>, b: Vec<u32>) -> PyResult<bool> {
        cup(&self.inner, &CohClass1::new(a), &CohClass1::new(b))
            .map(|c| c.is_zero())
            .map_err(to_py)
    }

    /// 1-based index of the first nonvanishing consecutive cup product, or None.
    fn triviality_failure(&self, alphas: Vec<Vec<u32>>) -> PyResult<Option<usize>> {
        triviality_failure(&self.inner, &classes(alphas)).map_err(to_py)
    }

    /// Certificate JSON for a witness of `0 ∈ ⟨α_1, …, α_n⟩`.
    #[pyo3(signature = (alphas, budget = DEFAULT_BUDGET))]
    fn strong_vanishing(&self, py: Python<'_>, alphas: Vec<Vec<u32>>, budget: u64) -> PyResult<String> {
        let alphas = classes(alphas);
        let g = &self.inner;
        py.detach(|| {
            let w = strong_vanishing_witness(g, &alphas, SearchOptions { budget })?;
            Certificate::new(g, &alphas, &w).map(|c| c.to_json_pretty())
        })
        .map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("Group({}, p={})", self.inner.describe(), self.inner.p())
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }
}

/// A matrix in U_{n+1}(F_p).
#[pyclass(name = "UniTriangular", frozen, eq)]
#[derive(PartialEq)]
struct PyUni {
    inner: UniTriangular,
}

#[pymethods]
impl PyUni {
    /// From the strictly upper entries in row-major order.
    #[new]
    fn new(p: u32, n: usize, entries: Vec<u32>) -> PyResult<Self> {
        let field = Fp::new(p).map_err(to_py)?;
        let inner = UniTriangular::from_entries(field, n, entries).map_err(to_py)?;
        Ok(PyUni { inner })
    }

    #[staticmethod]
    fn identity(p: u32, n: usize) -> PyResult<Self> {
        let field = Fp::new(p).map_err(to_py)?;
        Ok(PyUni {
            inner: UniTriangular::identity(field, n),
        })
    }

    #[getter]
    fn entries(&self) -> Vec<u32> {
        self.inner.entries().to_vec()
    }

    fn get(&self, i: usize, j: usize) -> u32 {
        self.inner.get(i, j)
    }

    fn filtration_level(&self) -> Option<usize> {
        self.inner.filtration_level()
    }

    fn __mul__(&self, other: &PyUni) -> PyResult<PyUni> {
        self.inner.mul(&other.inner).map(|inner| PyUni { inner }).map_err(to_py)
    }

    fn inv(&self) -> PyUni {
        PyUni { inner: self.inner.inv() }
    }

    fn power(&self, e: i64) -> PyUni {
        PyUni {
            inner: self.inner.power(e),
        }
    }

    /// `g h g⁻¹ h⁻¹`.
    fn commutator(&self, other: &PyUni) -> PyResult<PyUni> {
        self.inner
            .commutator(&other.inner)
            .map(|inner| PyUni { inner })
            .map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("UniTriangular(p={}, n={}, {:?})", self.inner.p(), self.inner.n(), self.inner.entries())
    }
}

/// `B` with `[B, a] = c` for `c` of filtration level at least `k`.
#[pyfunction]
fn solve_commutator_equation(a: &PyUni, c: &PyUni, k: usize) -> PyResult<PyUni> {
    core_solve(&a.inner, &c.inner, k).map(|inner| PyUni { inner }).map_err(to_py)
}

/// Re-checks certificate JSON; returns (passed, message).
#[pyfunction]
fn verify(certificate_json: &str) -> PyResult<(bool, String)> {
    let cert = Certificate::from_json(certificate_json).map_err(to_py)?;
    let v = verify_certificate(&cert).map_err(to_py)?;
    Ok((v == Verdict::Pass, v.to_string()))
}

/// JSON-lines report of a named suite.
#[pyfunction]
#[pyo3(signature = (name, jobs = 1, seed = 0))]
fn run_suite(py: Python<'_>, name: &str, jobs: usize, seed: u64) -> PyResult<(bool, String)> {
    let report = py
        .detach(|| core_run_suite(name, SuiteConfig { jobs, seed }))
        .map_err(to_py)?;
    Ok((report.passed(), report.to_json_lines()))
}

#[pymodule]
fn massey_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGroup>()?;
    m.add_class::<PyUni>()?;
    m.add_function(wrap_pyfunction!(solve_commutator_equation, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    m.add("TrivialityError", m.py().get_type::<TrivialityError>())?;
    m.add("SearchExhausted", m.py().get_type::<SearchExhausted>())?;
    Ok(())
}
