//! Python bindings. Reports come back as plain dicts and lists.

use mubar::diagrams::{conway_skein, verify_factorization, LinkDiagram, StringLink, StringLinkDiagram, DEFAULT_MAX_CROSSINGS};
use mubar::factor::{conway_from_seifert, gamma, gamma_checks};
use mubar::milnor::mu_table;
use mubar::words::{self, Braid, Word};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde_json::Value;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_pyobject(py)?.into_any(),
            None => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(a) => {
            let l = PyList::empty(py);
            for x in a {
                l.append(to_py(py, x)?)?;
            }
            l.into_any()
        }
        Value::Object(o) => {
            let d = PyDict::new(py);
            for (k, x) in o {
                d.set_item(k, to_py(py, x)?)?;
            }
            d.into_any()
        }
    })
}

/// A string link given by a pure braid or by explicit longitudes.
#[pyclass(name = "StringLink", module = "mubar_py")]
struct PyStringLink {
    inner: StringLink,
    // longitudes read from a diagram are only valid to this depth
    depth: Option<usize>,
}

impl PyStringLink {
    fn check(&self, q: usize) -> PyResult<()> {
        match self.depth {
            Some(d) if q > d => Err(PyValueError::new_err(format!("order {q} exceeds the depth {d} the longitudes were read at"))),
            _ => Ok(()),
        }
    }
}

#[pymethods]
impl PyStringLink {
    #[staticmethod]
    #[pyo3(signature = (strands, word, depth = 9))]
    fn from_braid(strands: usize, word: Vec<i32>, depth: usize) -> PyResult<Self> {
        let b = Braid::new(strands, word).map_err(err)?;
        Ok(PyStringLink { inner: StringLink::from_braid(&b, depth).map_err(err)?, depth: Some(depth) })
    }

    /// Longitudes as strings such as `"X1^-1 X2"`.
    #[staticmethod]
    fn from_longitudes(longitudes: Vec<String>) -> PyResult<Self> {
        let w = longitudes.iter().map(|s| Word::parse(s)).collect::<Result<Vec<_>, _>>().map_err(err)?;
        Ok(PyStringLink { inner: StringLink::from_longitudes(w).map_err(err)?, depth: None })
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m
    }

    fn longitudes(&self) -> Vec<String> {
        self.inner.longitudes.iter().map(|w| w.to_string()).collect()
    }

    fn linking(&self) -> Vec<Vec<i64>> {
        self.inner.linking.l.clone()
    }

    #[pyo3(signature = (q = 9))]
    fn mu_table<'py>(&self, py: Python<'py>, q: usize) -> PyResult<Bound<'py, PyAny>> {
        self.check(q)?;
        to_py(py, &mu_table(&self.inner.longitudes, q).map_err(err)?.to_json())
    }

    #[pyo3(signature = (q = 9))]
    fn gamma<'py>(&self, py: Python<'py>, q: usize) -> PyResult<Bound<'py, PyAny>> {
        self.check(q)?;
        let g = gamma(&mu_table(&self.inner.longitudes, q).map_err(err)?).map_err(err)?;
        let checks = gamma_checks(&g, &self.inner.linking).ok();
        to_py(py, &g.to_json(checks.as_ref()))
    }

    #[pyo3(signature = (q = 9, max_crossings = DEFAULT_MAX_CROSSINGS))]
    fn verify<'py>(&self, py: Python<'py>, q: usize, max_crossings: usize) -> PyResult<Bound<'py, PyAny>> {
        self.check(q)?;
        to_py(py, &verify_factorization(&self.inner, q, max_crossings).map_err(err)?.to_json())
    }

    fn __repr__(&self) -> String {
        format!("StringLink(m={}, longitudes={:?})", self.inner.m, self.longitudes())
    }
}

/// Conway coefficients (skein convention) of a link given as PD JSON.
#[pyfunction]
#[pyo3(signature = (pd_json, max_crossings = DEFAULT_MAX_CROSSINGS))]
fn conway_pd(pd_json: &str, max_crossings: usize) -> PyResult<Vec<String>> {
    let v: Value = serde_json::from_str(pd_json).map_err(err)?;
    let d = LinkDiagram::from_pd_json(&v).map_err(err)?;
    Ok(conway_skein(&d, max_crossings).map_err(err)?.coeffs().iter().map(|c| c.to_string()).collect())
}

/// Conway coefficients of the closure of a braid, skein convention.
#[pyfunction]
#[pyo3(signature = (strands, word, max_crossings = DEFAULT_MAX_CROSSINGS))]
fn conway_braid(strands: usize, word: Vec<i32>, max_crossings: usize) -> PyResult<Vec<String>> {
    let b = Braid::new(strands, word).map_err(err)?;
    let d = LinkDiagram::braid_closure(&b);
    Ok(conway_skein(&d, max_crossings).map_err(err)?.coeffs().iter().map(|c| c.to_string()).collect())
}

/// Conway coefficients from a Seifert matrix, plus whether `V - V^T` is unimodular.
#[pyfunction]
fn conway_seifert(matrix: Vec<Vec<i64>>) -> PyResult<(Vec<String>, bool)> {
    let (p, unimodular) = conway_from_seifert(&matrix).map_err(err)?;
    Ok((p.coeffs().iter().map(|c| c.to_string()).collect(), unimodular))
}

/// Tangle PD JSON of the string link drawn by a braid.
#[pyfunction]
fn tangle_pd(strands: usize, word: Vec<i32>) -> PyResult<String> {
    let b = Braid::new(strands, word).map_err(err)?;
    Ok(StringLinkDiagram::from_braid(&b).map_err(err)?.to_pd_json().to_string())
}

#[pyfunction]
fn reduce_word(word: &str) -> PyResult<String> {
    Ok(Word::parse(word).map_err(err)?.to_string())
}

#[pyfunction]
fn artin_apply(strands: usize, braid: Vec<i32>, word: &str) -> PyResult<String> {
    let b = Braid::new(strands, braid).map_err(err)?;
    let w = Word::parse(word).map_err(err)?;
    Ok(words::artin_apply(&b, &w).map_err(err)?.to_string())
}

#[pyfunction]
fn pure_braids(strands: usize, max_letters: usize) -> Vec<Vec<i32>> {
    words::pure_braids(strands, max_letters).iter().map(|b| b.word().to_vec()).collect()
}

#[pymodule]
fn mubar_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyStringLink>()?;
    m.add_function(wrap_pyfunction!(conway_pd, m)?)?;
    m.add_function(wrap_pyfunction!(conway_braid, m)?)?;
    m.add_function(wrap_pyfunction!(conway_seifert, m)?)?;
    m.add_function(wrap_pyfunction!(tangle_pd, m)?)?;
    m.add_function(wrap_pyfunction!(reduce_word, m)?)?;
    m.add_function(wrap_pyfunction!(artin_apply, m)?)?;
    m.add_function(wrap_pyfunction!(pure_braids, m)?)?;
    Ok(())
}
