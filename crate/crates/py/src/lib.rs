//! Python bindings: cases, meshes, the HDG solve, error norms, studies and
//! the property suite.

use std::sync::Arc;

use porox::analysis::{field_error, run_study, Field, PostProcessed, Rate, Region};
use porox::config::{parse_config, Gamma, RawConfig};
use porox::discretization::{Point, Shape};
use porox::hdg::{recover_unscaled, HdgProblem, HdgSolution, SolverOptions};
use porox::mesh::build_structured_mesh;
use porox::physics::{builtin_case, CaseParams, ManufacturedCase};
use porox::verify::{run_verify, VerifyOptions};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(err: porox::Error) -> PyErr {
    if err.is_validation() {
        PyValueError::new_err(err.to_string())
    } else {
        PyRuntimeError::new_err(err.to_string())
    }
}

fn point(x: &[f64], dim: usize) -> PyResult<Point> {
    if x.len() != dim {
        return Err(PyValueError::new_err(format!(
            "expected a point with {dim} coordinates, got {}",
            x.len()
        )));
    }
    let mut p = [0.0; 3];
    p[..dim].copy_from_slice(x);
    Ok(p)
}

fn shape_name(s: Shape) -> &'static str {
    match s {
        Shape::Segment => "segment",
        Shape::Quad => "quad",
        Shape::Tri => "tri",
        Shape::Hex => "hex",
    }
}

fn parse_shape(s: &str) -> PyResult<Shape> {
    match s {
        "quad" => Ok(Shape::Quad),
        "tri" => Ok(Shape::Tri),
        "hex" => Ok(Shape::Hex),
        _ => Err(PyValueError::new_err(format!("unknown shape {s:?}"))),
    }
}

fn parse_region(region: Option<(Vec<f64>, Vec<f64>)>) -> PyResult<Region> {
    match region {
        None => Ok(Region::All),
        Some((lo, hi)) => Region::from_box(&lo, &hi).map_err(to_py),
    }
}

/// A builtin manufactured case.
#[pyclass(name = "Case", frozen, from_py_object)]
#[derive(Clone)]
struct PyCase {
    inner: Arc<ManufacturedCase>,
}

#[pymethods]
impl PyCase {
    #[new]
    #[pyo3(signature = (name, m=None, alpha=None, beta=None, dim=None))]
    fn new(
        name: &str,
        m: Option<Vec<f64>>,
        alpha: Option<f64>,
        beta: Option<f64>,
        dim: Option<usize>,
    ) -> PyResult<Self> {
        let params = CaseParams {
            m,
            alpha,
            beta,
            dim,
        };
        let inner = builtin_case(name, &params).map_err(to_py)?;
        Ok(Self {
            inner: Arc::new(inner),
        })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn default_shape(&self) -> &'static str {
        shape_name(self.inner.default_shape())
    }

    fn one_phase(&self, x: Vec<f64>) -> PyResult<bool> {
        Ok(self.inner.one_phase(&point(&x, self.dim())?))
    }

    /// Exact scaled pressure and velocity at `x`.
    fn exact(&self, x: Vec<f64>) -> PyResult<(f64, Vec<f64>)> {
        let s = self.inner.exact(&point(&x, self.dim())?);
        Ok((s.p, s.u[..self.dim()].to_vec()))
    }

    fn __repr__(&self) -> String {
        format!("Case({:?})", self.inner.name)
    }
}

/// Structured mesh of a case's domain with `n` elements per axis.
#[pyclass(name = "Mesh", frozen, from_py_object)]
#[derive(Clone)]
struct PyMesh {
    inner: Arc<porox::mesh::Mesh>,
}

#[pymethods]
impl PyMesh {
    #[new]
    #[pyo3(signature = (case, n, shape=None))]
    fn new(case: &PyCase, n: usize, shape: Option<&str>) -> PyResult<Self> {
        let shape = match shape {
            Some(s) => parse_shape(s)?,
            None => case.inner.default_shape(),
        };
        let inner = build_structured_mesh(&case.inner.domain, shape, n).map_err(to_py)?;
        Ok(Self {
            inner: Arc::new(inner),
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim
    }

    #[getter]
    fn shape(&self) -> &'static str {
        shape_name(self.inner.shape)
    }

    #[getter]
    fn num_elements(&self) -> usize {
        self.inner.elements.len()
    }

    #[getter]
    fn num_faces(&self) -> usize {
        self.inner.faces.len()
    }

    /// Largest element diameter.
    #[getter]
    fn h(&self) -> f64 {
        self.inner.h
    }

    #[getter]
    fn side_length(&self) -> f64 {
        self.inner.side_length()
    }

    fn centroid(&self, element: usize) -> PyResult<Vec<f64>> {
        let el = self
            .inner
            .elements
            .get(element)
            .ok_or_else(|| PyValueError::new_err("element index out of range"))?;
        Ok(el.centroid[..self.inner.dim].to_vec())
    }

    fn __repr__(&self) -> String {
        format!(
            "Mesh(shape={:?}, n={}, elements={})",
            self.shape(),
            self.inner.n,
            self.inner.elements.len()
        )
    }
}

fn options(tau: &str, gamma: Option<f64>, tau_value: Option<f64>) -> PyResult<SolverOptions> {
    let raw = RawConfig {
        tau: Some(tau.to_string()),
        gamma: gamma.map(Gamma::Value),
        tau_value,
        ..Default::default()
    };
    Ok(raw.validate().map_err(to_py)?.options)
}

/// An HDG discretization of a case on a mesh at degree k.
#[pyclass(name = "Problem", frozen)]
struct PyProblem {
    mesh: PyMesh,
    case: PyCase,
    k: usize,
    options: SolverOptions,
}

impl PyProblem {
    fn build(&self) -> PyResult<HdgProblem<'_>> {
        HdgProblem::new(
            &self.mesh.inner,
            &self.case.inner,
            self.k,
            self.options.clone(),
        )
        .map_err(to_py)
    }
}

#[pymethods]
impl PyProblem {
    /// `tau` is "generalized" (default), "upwind", "1/h" or "constant".
    /// `gamma` fixes the degenerate-face value of the generalized policy
    /// (default 1/h); `tau_value` is the constant policy's value.
    #[new]
    #[pyo3(signature = (mesh, case, k, tau="generalized", gamma=None, tau_value=None))]
    fn new(
        mesh: PyMesh,
        case: PyCase,
        k: usize,
        tau: &str,
        gamma: Option<f64>,
        tau_value: Option<f64>,
    ) -> PyResult<Self> {
        let problem = Self {
            mesh,
            case,
            k,
            options: options(tau, gamma, tau_value)?,
        };
        problem.build()?;
        Ok(problem)
    }

    #[getter]
    fn k(&self) -> usize {
        self.k
    }

    #[getter]
    fn trace_dofs(&self) -> PyResult<usize> {
        Ok(self.build()?.trace_dofs())
    }

    /// Statically condensed solve.
    fn solve(&self, py: Python<'_>) -> PyResult<PySolution> {
        let sol = py.detach(|| self.build().and_then(|p| p.solve().map_err(to_py)))?;
        Ok(PySolution {
            mesh: self.mesh.clone(),
            case: self.case.clone(),
            inner: sol,
        })
    }

    /// Uncondensed solve of the full system, in the layout of `Solution.to_vector`.
    fn solve_monolithic(&self, py: Python<'_>) -> PyResult<Vec<f64>> {
        py.detach(|| {
            let p = self.build()?;
            p.assemble_monolithic(None)
                .and_then(|s| s.solve())
                .map_err(to_py)
        })
    }

    /// Largest conservation residual over interior faces.
    fn conservation_residual(&self, solution: &PySolution) -> PyResult<f64> {
        Ok(self.build()?.conservation_residual(&solution.inner))
    }
}

/// Element unknowns and traces of a solved problem.
#[pyclass(name = "Solution", frozen)]
struct PySolution {
    mesh: PyMesh,
    case: PyCase,
    inner: HdgSolution,
}

#[pymethods]
impl PySolution {
    #[getter]
    fn trace_residual(&self) -> f64 {
        self.inner.trace_residual
    }

    #[getter]
    fn num_elements(&self) -> usize {
        self.inner.num_elements()
    }

    fn to_vector(&self) -> Vec<f64> {
        self.inner.to_vector()
    }

    /// Scaled pressure and velocity at physical point `x` of `element`.
    fn eval(&self, element: usize, x: Vec<f64>) -> PyResult<(f64, Vec<f64>)> {
        let dim = self.mesh.inner.dim;
        if element >= self.inner.num_elements() {
            return Err(PyValueError::new_err("element index out of range"));
        }
        let (p, u) = self.inner.eval(&self.mesh.inner, element, &point(&x, dim)?);
        Ok((p, u[..dim].to_vec()))
    }

    /// Unscaled pressure and velocity at `x`; zero on the one-phase region.
    fn unscaled(&self, element: usize, x: Vec<f64>) -> PyResult<(f64, Vec<f64>)> {
        let dim = self.mesh.inner.dim;
        if element >= self.inner.num_elements() {
            return Err(PyValueError::new_err("element index out of range"));
        }
        let x = point(&x, dim)?;
        let (p, u) = recover_unscaled(
            &self.mesh.inner,
            &self.case.inner,
            &self.inner,
            element,
            &[x],
        )[0];
        Ok((p, u[..dim].to_vec()))
    }

    /// L² errors of the named fields ("p", "u", "pstar", "ptilde",
    /// "ptildestar") over the whole domain or a box `(lo, hi)`.
    #[pyo3(signature = (fields=vec!["p".to_string(), "u".to_string()], region=None))]
    fn errors<'py>(
        &self,
        py: Python<'py>,
        fields: Vec<String>,
        region: Option<(Vec<f64>, Vec<f64>)>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let region = parse_region(region)?;
        let parsed: Vec<Field> = fields
            .iter()
            .map(|f| Field::parse(f))
            .collect::<porox::Result<_>>()
            .map_err(to_py)?;
        let (mesh, case, sol) = (&*self.mesh.inner, &*self.case.inner, &self.inner);
        let values = py.detach(|| -> porox::Result<Vec<f64>> {
            let post = PostProcessed::compute(mesh, case, sol, &parsed, &region)?;
            parsed
                .iter()
                .map(|&f| field_error(mesh, case, sol, &post, f, &region, Default::default()))
                .collect()
        });
        let out = PyDict::new(py);
        for (f, v) in fields.iter().zip(values.map_err(to_py)?) {
            out.set_item(f, v)?;
        }
        Ok(out)
    }
}

fn rate_value(r: Rate) -> Option<f64> {
    match r {
        Rate::Absent => None,
        Rate::Exact => Some(f64::INFINITY),
        Rate::Value(v) => Some(v),
    }
}

/// Observed convergence rates. The first entry is None; an exact
/// reproduction gives infinity.
#[pyfunction]
fn rates(errors: Vec<f64>, hs: Vec<f64>) -> PyResult<Vec<Option<f64>>> {
    Ok(porox::analysis::rates(&errors, &hs)
        .map_err(to_py)?
        .into_iter()
        .map(rate_value)
        .collect())
}

/// Runs a convergence study from a JSON config and returns one dict per
/// (k, n) row for each configured region.
#[pyfunction]
fn study<'py>(py: Python<'py>, config: &str) -> PyResult<Vec<Vec<Bound<'py, PyDict>>>> {
    let cfg = parse_config(config, RawConfig::default()).map_err(to_py)?;
    let tables = py.detach(|| {
        cfg.regions
            .iter()
            .map(|r| run_study(&cfg.study(r)))
            .collect::<porox::Result<Vec<_>>>()
    });
    let mut out = Vec::new();
    for table in tables.map_err(to_py)? {
        let mut rows = Vec::new();
        for row in &table.rows {
            let d = PyDict::new(py);
            d.set_item("k", row.k)?;
            d.set_item("n", row.n)?;
            d.set_item("h", row.h)?;
            match &row.errors {
                Ok(errs) => {
                    let e = PyDict::new(py);
                    let r = PyDict::new(py);
                    for ((f, v), rate) in table.fields.iter().zip(errs).zip(&row.rates) {
                        e.set_item(f.label(), v)?;
                        r.set_item(f.label(), rate_value(*rate))?;
                    }
                    d.set_item("errors", e)?;
                    d.set_item("rates", r)?;
                }
                Err(msg) => d.set_item("failed", msg)?,
            }
            rows.push(d);
        }
        out.push(rows);
    }
    Ok(out)
}

/// Runs the property suite; returns (name, value, threshold, passed) per check.
#[pyfunction]
#[pyo3(signature = (quick=true))]
fn verify(py: Python<'_>, quick: bool) -> Vec<(String, f64, f64, bool)> {
    py.detach(|| {
        run_verify(VerifyOptions {
            quick,
            flip_tau_sign: false,
        })
    })
    .into_iter()
    .map(|r| (r.name.to_string(), r.value, r.threshold, r.passed))
    .collect()
}

#[pymodule(name = "porox")]
pub fn porox_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCase>()?;
    m.add_class::<PyMesh>()?;
    m.add_class::<PyProblem>()?;
    m.add_class::<PySolution>()?;
    m.add_function(wrap_pyfunction!(rates, m)?)?;
    m.add_function(wrap_pyfunction!(study, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add("CASES", porox::physics::CASE_NAMES.to_vec())?;
    Ok(())
}
