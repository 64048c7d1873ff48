//! Python bindings. Reports come back as plain dicts with the same keys as
//! the CLI's JSON output.

use orlicz_hardy::bloomkerman::{bk_check, muckenhoupt_b, BkConfig};
use orlicz_hardy::catalog;
use orlicz_hardy::classify::{classify_with, TestFunction, TestKind};
use orlicz_hardy::expr::{parse, Expr};
use orlicz_hardy::func::Func;
use orlicz_hardy::integrate::{luxemburg_norm, weighted_modular, QuadConfig};
use orlicz_hardy::nfunction::{NFunction, Young};
use orlicz_hardy::spec_file::{FunctionSpec, TripleSpec};
use orlicz_hardy::verifier::{norm_verify, sharpness_search, stock_functions, verify_with, Family};
use orlicz_hardy::weights::WeightTriple;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyAny;
use serde::Serialize;

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py>(py: Python<'py>, v: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn quad(rel_tol: Option<f64>) -> QuadConfig {
    let mut cfg = QuadConfig::default();
    if let Some(t) = rel_tol {
        cfg.rel_tol = t;
    }
    cfg
}

/// A grammar expression in the variable r.
#[pyclass(name = "Expr", frozen)]
struct PyExpr(Expr);

#[pymethods]
impl PyExpr {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        parse(text).map(PyExpr).map_err(value_error)
    }

    fn __call__(&self, r: f64) -> PyResult<f64> {
        self.0.eval(r).map_err(value_error)
    }

    fn derivative(&self) -> PyExpr {
        PyExpr(self.0.differentiate())
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Expr({:?})", self.0.to_string())
    }
}

/// `power:p=..`, `power_sum:p=..,q=..`, or an expression in r.
#[pyclass(name = "NFunction", frozen)]
struct PyNFunction(NFunction);

#[pymethods]
impl PyNFunction {
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        NFunction::from_spec(spec).map(PyNFunction).map_err(value_error)
    }

    fn __call__(&self, x: f64) -> f64 {
        self.0.value(x)
    }

    fn conjugate(&self, y: f64) -> PyResult<f64> {
        self.0.conjugate_value(y).map_err(value_error)
    }

    fn derivative(&self, x: f64) -> f64 {
        self.0.derivative(x)
    }

    /// max(λ^d, λ^D).
    fn c(&self, lam: f64) -> f64 {
        self.0.c_of(lam)
    }

    fn c_inverse(&self, t: f64) -> f64 {
        self.0.c_inverse(t)
    }

    /// Simonenko indices (d_M, D_M).
    #[getter]
    fn indices(&self) -> (f64, f64) {
        (self.0.d(), self.0.big_d())
    }

    #[getter]
    fn name(&self) -> String {
        self.0.name()
    }

    fn __repr__(&self) -> String {
        format!("NFunction({:?})", self.0.name())
    }
}

fn test_function(u: &str, uprime: Option<String>, kind: &str, support: Option<(f64, f64)>) -> PyResult<TestFunction> {
    let kind: TestKind = serde_json::from_value(serde_json::Value::String(kind.replace('-', "_"))).map_err(|_| {
        PyValueError::new_err(format!("unknown kind {kind:?}; use generic, hardy_transform or conjugate_hardy_transform"))
    })?;
    FunctionSpec { name: None, u: u.into(), uprime, kind, support }.build().map_err(value_error)
}

/// A weight triple (M, φ, ω).
#[pyclass(name = "Triple", frozen)]
struct PyTriple {
    spec: TripleSpec,
    t: WeightTriple,
}

#[pymethods]
impl PyTriple {
    #[new]
    #[pyo3(signature = (m, phi, omega))]
    fn new(m: &str, phi: &str, omega: &str) -> PyResult<Self> {
        let spec = TripleSpec::new(m, phi, omega);
        let t = spec.build().map_err(value_error)?;
        Ok(PyTriple { spec, t })
    }

    /// A catalog entry such as `classical:p=2,alpha=4`.
    #[staticmethod]
    fn preset(name: &str) -> PyResult<Self> {
        let spec = catalog::load(name).map_err(value_error)?.triple;
        let t = spec.build().map_err(value_error)?;
        Ok(PyTriple { spec, t })
    }

    #[getter]
    fn spec<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.spec)
    }

    fn b1(&self, r: f64) -> PyResult<f64> {
        self.t.b1_at(r).map_err(value_error)
    }

    fn b2(&self, r: f64) -> PyResult<f64> {
        self.t.b2_at(r).map_err(value_error)
    }

    #[pyo3(name = "L")]
    fn l(&self, r: f64) -> PyResult<f64> {
        self.t.l_at(r).map_err(value_error)
    }

    fn certify<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.t.certify())
    }

    #[pyo3(signature = (u, uprime=None, kind="generic", support=None, constant=None, rel_tol=None))]
    fn verify<'py>(
        &self,
        py: Python<'py>,
        u: &str,
        uprime: Option<String>,
        kind: &str,
        support: Option<(f64, f64)>,
        constant: Option<f64>,
        rel_tol: Option<f64>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let f = test_function(u, uprime, kind, support)?;
        let report = py.detach(|| verify_with(&self.t, &self.t.certify(), &f, constant, &quad(rel_tol)));
        to_py(py, &report)
    }

    /// Luxemburg-norm comparison against C + 1.
    #[pyo3(signature = (u, uprime=None, kind="generic", support=None))]
    fn verify_norm<'py>(
        &self,
        py: Python<'py>,
        u: &str,
        uprime: Option<String>,
        kind: &str,
        support: Option<(f64, f64)>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let f = test_function(u, uprime, kind, support)?;
        let report = py.detach(|| norm_verify(&self.t, &self.t.certify(), &f, &QuadConfig::default()));
        to_py(py, &report)
    }

    /// Reports for the built-in test functions.
    fn verify_stock<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let cert = self.t.certify();
        let cfg = QuadConfig::default();
        let reports: Vec<_> = py.detach(|| stock_functions().iter().map(|u| verify_with(&self.t, &cert, u, None, &cfg)).collect());
        to_py(py, &reports)
    }

    #[pyo3(signature = (u, uprime=None, kind="generic", support=None))]
    fn classify<'py>(
        &self,
        py: Python<'py>,
        u: &str,
        uprime: Option<String>,
        kind: &str,
        support: Option<(f64, f64)>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let f = test_function(u, uprime, kind, support)?;
        let cfg = QuadConfig::default();
        let verdict = py.detach(|| {
            let energy = (f.kind != TestKind::Generic)
                .then(|| weighted_modular(&f.uprime, &self.t.m, Some(&Func::expr(self.t.phi.clone())), 0.0, f64::INFINITY, &cfg).ok())
                .flatten()
                .and_then(|h| if h.converged() { Some(true) } else if h.diverges() { Some(false) } else { None });
            classify_with(&self.t, &f, energy, &cfg)
        });
        to_py(py, &verdict)
    }

    fn bk<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let v = py.detach(|| bk_check(&self.t, &BkConfig::default(), &QuadConfig::default())).map_err(value_error)?;
        to_py(py, &v)
    }

    fn muckenhoupt<'py>(&self, py: Python<'py>, p: f64) -> PyResult<Bound<'py, PyAny>> {
        let v = muckenhoupt_b(p, &self.t, &QuadConfig::default()).map_err(value_error)?;
        to_py(py, &v)
    }

    /// `family` is `extremal` (needs p and alpha of a classical triple) or `bumps`.
    #[pyo3(signature = (family="bumps", budget=10_000, p=None, alpha=None))]
    fn sharpness<'py>(
        &self,
        py: Python<'py>,
        family: &str,
        budget: usize,
        p: Option<f64>,
        alpha: Option<f64>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let fam = match (family, p, alpha) {
            ("extremal", Some(p), Some(a)) => Family::classical_extremal(p, a),
            ("extremal", _, _) => return Err(PyValueError::new_err("the extremal family needs p and alpha")),
            ("bumps", _, _) => Family::compact_bumps(),
            _ => return Err(PyValueError::new_err(format!("unknown family {family:?}"))),
        };
        let cert = self.t.certify();
        let r = py.detach(|| sharpness_search(&self.t, &cert, &fam, budget, &QuadConfig::default())).map_err(value_error)?;
        to_py(py, &r)
    }

    fn __repr__(&self) -> String {
        format!("Triple(M={:?}, phi={:?}, omega={:?})", self.spec.m, self.spec.phi, self.spec.omega)
    }
}

/// Luxemburg norm of f in L^M(e^{-φ} dx) on (a, b).
#[pyfunction]
#[pyo3(signature = (f, m, phi=None, a=0.0, b=f64::INFINITY))]
fn luxemburg<'py>(py: Python<'py>, f: &str, m: &PyNFunction, phi: Option<&str>, a: f64, b: f64) -> PyResult<Bound<'py, PyAny>> {
    let f = Func::expr(parse(f).map_err(value_error)?);
    let phi = phi.map(|p| parse(p).map(Func::expr)).transpose().map_err(value_error)?;
    let n = luxemburg_norm(&f, &m.0, phi.as_ref(), a, b, &QuadConfig::default()).map_err(value_error)?;
    to_py(py, &n)
}

#[pyfunction]
fn catalog_names() -> Vec<String> {
    catalog::sweep_entries()
}

#[pyfunction]
fn catalog_entry<'py>(py: Python<'py>, name: &str) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &catalog::load(name).map_err(value_error)?)
}

#[pyfunction]
fn stock_names() -> Vec<String> {
    stock_functions().into_iter().map(|u| u.name).collect()
}

#[pymodule]
#[pyo3(name = "orlicz_hardy")]
fn py_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyExpr>()?;
    m.add_class::<PyNFunction>()?;
    m.add_class::<PyTriple>()?;
    m.add_function(wrap_pyfunction!(luxemburg, m)?)?;
    m.add_function(wrap_pyfunction!(catalog_names, m)?)?;
    m.add_function(wrap_pyfunction!(catalog_entry, m)?)?;
    m.add_function(wrap_pyfunction!(stock_names, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
