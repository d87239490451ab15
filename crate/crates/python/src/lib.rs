//! Python bindings: `import vexp`.
//!
//! Grids, exponent fields, functions and sequences are immutable wrappers
//! around the core types. Bad input raises `ValueError`, numerical failures
//! raise `ArithmeticError`.

use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

use vexp_core::besov::{build_filter_pair_with, FilterOptions, FilterShape};
use vexp_core::domain::{self, Complex64};
use vexp_core::exponents::{self, Exponent, ExponentClass};
use vexp_core::io::Tolerances;
use vexp_core::verify::{self as harness, Faults, VerifyConfig};
use vexp_core::{duality, lebesgue, mixed, Error, Method};

fn err(e: Error) -> PyErr {
    if e.is_numerical() {
        PyArithmeticError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn exponent(v: f64) -> PyResult<Exponent> {
    if v == f64::INFINITY {
        Ok(Exponent::Infinite)
    } else if v.is_finite() {
        Ok(Exponent::Finite(v))
    } else {
        Err(PyValueError::new_err(format!("invalid exponent {v}")))
    }
}

fn method(name: &str) -> PyResult<Method> {
    match name.to_ascii_lowercase().as_str() {
        "ascent" => Ok(Method::Ascent),
        "brute" => Ok(Method::Brute),
        _ => Err(PyValueError::new_err(format!(
            "method must be 'ascent' or 'brute', got {name:?}"
        ))),
    }
}

/// Uniform grid of `n_points` (a power of two, at least 8) on `[-L, L)`.
#[pyclass(frozen, from_py_object, name = "Grid")]
#[derive(Clone)]
struct PyGrid(domain::Grid);

#[pymethods]
impl PyGrid {
    #[new]
    #[pyo3(signature = (half_length = 2.0, n_points = 1024))]
    fn new(half_length: f64, n_points: usize) -> PyResult<Self> {
        domain::Grid::new(half_length, n_points).map(Self).map_err(err)
    }

    #[getter]
    fn half_length(&self) -> f64 {
        self.0.half_length()
    }

    #[getter]
    fn dx(&self) -> f64 {
        self.0.dx()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn points(&self) -> Vec<f64> {
        self.0.points().collect()
    }

    fn __repr__(&self) -> String {
        format!("Grid(half_length={}, n_points={})", self.0.half_length(), self.0.len())
    }
}

/// Exponent field; `float('inf')` entries mark infinite exponents.
#[pyclass(frozen, from_py_object, name = "ExponentField")]
#[derive(Clone)]
struct PyExponentField(exponents::ExponentField);

#[pymethods]
impl PyExponentField {
    /// `values` per grid point. Class P unless `floor` (class P0) or `real`.
    #[new]
    #[pyo3(signature = (grid, values, floor = None, real = false))]
    fn new(grid: &PyGrid, values: Vec<f64>, floor: Option<f64>, real: bool) -> PyResult<Self> {
        let class = match (floor, real) {
            (_, true) => ExponentClass::Real,
            (Some(floor), false) => ExponentClass::P0 { floor },
            (None, false) => ExponentClass::P,
        };
        let v = values.into_iter().map(exponent).collect::<PyResult<Vec<_>>>()?;
        exponents::ExponentField::new(grid.0, v, class).map(Self).map_err(err)
    }

    #[staticmethod]
    #[pyo3(signature = (grid, value, floor = None, real = false))]
    fn constant(grid: &PyGrid, value: f64, floor: Option<f64>, real: bool) -> PyResult<Self> {
        Self::new(grid, vec![value; grid.0.len()], floor, real)
    }

    fn values(&self) -> Vec<f64> {
        self.0.values().iter().map(|e| e.as_f64()).collect()
    }

    #[getter]
    fn minus(&self) -> f64 {
        self.0.p_minus().as_f64()
    }

    #[getter]
    fn plus(&self) -> f64 {
        self.0.p_plus().as_f64()
    }

    fn conjugate(&self) -> PyResult<Self> {
        exponents::conjugate(&self.0).map(Self).map_err(err)
    }
}

/// Complex-capable function sampled on a grid.
#[pyclass(frozen, from_py_object, name = "GridFunction")]
#[derive(Clone)]
struct PyGridFunction(domain::GridFunction);

#[pymethods]
impl PyGridFunction {
    #[new]
    #[pyo3(signature = (grid, values, imag = None))]
    fn new(grid: &PyGrid, values: Vec<f64>, imag: Option<Vec<f64>>) -> PyResult<Self> {
        match imag {
            None => domain::GridFunction::new(grid.0, values),
            Some(im) => {
                if im.len() != values.len() {
                    return Err(PyValueError::new_err("values and imag differ in length"));
                }
                let z = values.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect();
                domain::GridFunction::from_complex(grid.0, z)
            }
        }
        .map(Self)
        .map_err(err)
    }

    fn values(&self) -> Vec<f64> {
        self.0.values().to_vec()
    }

    fn imag(&self) -> Option<Vec<f64>> {
        self.0.imag().map(<[f64]>::to_vec)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

/// Finite sequence of grid functions on one grid.
#[pyclass(frozen, from_py_object, name = "FuncSequence")]
#[derive(Clone)]
struct PyFuncSequence(domain::FuncSequence);

#[pymethods]
impl PyFuncSequence {
    #[new]
    fn new(grid: &PyGrid, terms: Vec<Vec<f64>>) -> PyResult<Self> {
        let terms = terms
            .into_iter()
            .map(|t| domain::GridFunction::new(grid.0, t))
            .collect::<Result<Vec<_>, _>>()
            .map_err(err)?;
        domain::FuncSequence::new(grid.0, terms).map(Self).map_err(err)
    }

    #[staticmethod]
    fn from_functions(grid: &PyGrid, terms: Vec<PyGridFunction>) -> PyResult<Self> {
        domain::FuncSequence::new(grid.0, terms.into_iter().map(|t| t.0).collect())
            .map(Self)
            .map_err(err)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    /// `P_n f`: the first `n` terms, zeros after.
    fn project(&self, n: usize) -> Self {
        Self(self.0.project(n))
    }

    /// `f - P_n f`.
    fn tail(&self, n: usize) -> Self {
        Self(self.0.tail(n))
    }
}

#[pyfunction]
fn modular_lp(p: &PyExponentField, f: &PyGridFunction) -> PyResult<f64> {
    lebesgue::modular_lp(&p.0, &f.0).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (p, f, tol = 1e-10))]
fn luxemburg_norm(p: &PyExponentField, f: &PyGridFunction, tol: f64) -> PyResult<f64> {
    lebesgue::luxemburg_norm(&p.0, &f.0, tol).map(|r| r.value).map_err(err)
}

/// Per-term infima and their sum.
#[pyfunction]
#[pyo3(signature = (p, q, f, tol = 1e-10))]
fn mixed_modular_p1(
    p: &PyExponentField,
    q: &PyExponentField,
    f: &PyFuncSequence,
    tol: f64,
) -> PyResult<(Vec<f64>, f64)> {
    mixed::mixed_modular_p1(&p.0, &q.0, &f.0, tol)
        .map(|b| (b.per_term, b.total))
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (p, q, f, tol = 1e-10))]
fn mixed_modular_p1a(p: &PyExponentField, q: &PyExponentField, f: &PyFuncSequence, tol: f64) -> PyResult<f64> {
    mixed::mixed_modular_p1a(&p.0, &q.0, &f.0, tol).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (p, q, f, tol = 1e-8))]
fn mixed_norm(p: &PyExponentField, q: &PyExponentField, f: &PyFuncSequence, tol: f64) -> PyResult<f64> {
    mixed::mixed_norm(&p.0, &q.0, &f.0, tol).map(|r| r.value).map_err(err)
}

/// "COND1", "COND2", "COND3" or "NONE".
#[pyfunction]
fn check_normability(p: &PyExponentField, q: &PyExponentField) -> PyResult<String> {
    let c = exponents::check_normability(&p.0, &q.0).map_err(err)?;
    Ok(condition_name(c.tag).to_string())
}

fn condition_name(tag: exponents::ConditionTag) -> &'static str {
    match tag {
        exponents::ConditionTag::Cond1 => "COND1",
        exponents::ConditionTag::Cond2 => "COND2",
        exponents::ConditionTag::Cond3 => "COND3",
        exponents::ConditionTag::None => "NONE",
    }
}

#[pyfunction]
fn pairing(f: &PyFuncSequence, g: &PyFuncSequence) -> PyResult<f64> {
    duality::pairing(&f.0, &g.0).map_err(err)
}

/// Returns `(value, certificate_gap)`; the gap is `None` when unavailable.
#[pyfunction]
#[pyo3(signature = (p, q, g, method = "ascent", tol = 1e-8))]
fn kothe_dual_norm(
    p: &PyExponentField,
    q: &PyExponentField,
    g: &PyFuncSequence,
    method: &str,
    tol: f64,
) -> PyResult<(f64, Option<f64>)> {
    let r = duality::kothe_dual_norm(&p.0, &q.0, &g.0, self::method(method)?, tol).map_err(err)?;
    Ok((r.value, r.certificate_gap))
}

#[pyfunction]
#[pyo3(signature = (p, q, g, n, method = "ascent", tol = 1e-8))]
fn dual_tail_norm(
    p: &PyExponentField,
    q: &PyExponentField,
    g: &PyFuncSequence,
    n: usize,
    method: &str,
    tol: f64,
) -> PyResult<f64> {
    duality::dual_tail_norm(&p.0, &q.0, &g.0, n, self::method(method)?, tol).map_err(err)
}

/// `sup |<f, g>| / ||g||'` divided by `||f||`; `None` for `f = 0`.
#[pyfunction]
#[pyo3(signature = (p, q, f, tol = 1e-7))]
fn norming_ratio(p: &PyExponentField, q: &PyExponentField, f: &PyFuncSequence, tol: f64) -> PyResult<Option<f64>> {
    duality::norming_check(&p.0, &q.0, &f.0, Method::Ascent, tol)
        .map(|r| r.ratio)
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (f, s, p, q, tol = 1e-8, shape = "standard"))]
fn besov_norm(
    f: &PyGridFunction,
    s: &PyExponentField,
    p: &PyExponentField,
    q: &PyExponentField,
    tol: f64,
    shape: &str,
) -> PyResult<f64> {
    let shape = match shape {
        "standard" => FilterShape::Standard,
        "skewed" => FilterShape::Skewed,
        _ => return Err(PyValueError::new_err(format!("unknown filter shape {shape:?}"))),
    };
    let filters = build_filter_pair_with(*f.0.grid(), FilterOptions { shape, normalize: true }).map_err(err)?;
    vexp_core::besov::besov_norm(&f.0, &s.0, &p.0, &q.0, &filters, tol)
        .map(|r| r.value)
        .map_err(err)
}

/// Runs the property suites; returns `(passed, csv_report)`.
#[pyfunction]
#[pyo3(signature = (suites = vec!["all".to_string()], seed = 42, samples = 50, half_length = 2.0, n_points = 1024))]
fn verify(
    suites: Vec<String>,
    seed: u64,
    samples: usize,
    half_length: f64,
    n_points: usize,
) -> PyResult<(bool, String)> {
    let cfg = VerifyConfig {
        grid: domain::Grid::new(half_length, n_points).map_err(err)?,
        seed,
        samples,
        tolerances: Tolerances::default(),
        suites: harness::parse_suites(&suites).map_err(err)?,
        faults: Faults::default(),
    };
    let report = harness::run(&cfg).map_err(err)?;
    Ok((report.passed(), report.to_csv()))
}

#[pymodule]
fn vexp(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PyExponentField>()?;
    m.add_class::<PyGridFunction>()?;
    m.add_class::<PyFuncSequence>()?;
    m.add_function(wrap_pyfunction!(modular_lp, m)?)?;
    m.add_function(wrap_pyfunction!(luxemburg_norm, m)?)?;
    m.add_function(wrap_pyfunction!(mixed_modular_p1, m)?)?;
    m.add_function(wrap_pyfunction!(mixed_modular_p1a, m)?)?;
    m.add_function(wrap_pyfunction!(mixed_norm, m)?)?;
    m.add_function(wrap_pyfunction!(check_normability, m)?)?;
    m.add_function(wrap_pyfunction!(pairing, m)?)?;
    m.add_function(wrap_pyfunction!(kothe_dual_norm, m)?)?;
    m.add_function(wrap_pyfunction!(dual_tail_norm, m)?)?;
    m.add_function(wrap_pyfunction!(norming_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(besov_norm, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
