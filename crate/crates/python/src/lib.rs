//! Python bindings: manifolds, hypersurfaces, `□` operators, mesh spectra,
//! eigenvalue bounds and the verification harness.
//!
//! Structured results cross the boundary as JSON and are decoded with the
//! standard `json` module, so they arrive as plain dicts and lists.

use bochner_core::bounds::{
    compare, newton_bound as core_newton_bound, schouten_bound as core_schouten_bound, BoundInput, MuSource,
    NewtonBoundInput, SchoutenBoundInput,
};
use bochner_core::boxop::BoxOperator as CoreBox;
use bochner_core::discretize::{assemble_mesh, MeshCoefficient, Quadrature, SurfaceMesh};
use bochner_core::geometry::{
    curvature_at, min_ricci, min_sectional, parse_tensor, ChartManifold, ManifoldPoint, SamplePlan, ScalarField,
};
use bochner_core::harness::{
    compare_surface as core_compare_surface, l1_mesh_problem, newton_inequality_trials, qa_bound_trials, RunConfig,
    TrialConfig,
};
use bochner_core::hypersurface::ImmersedHypersurface;
use bochner_core::spectral::{smallest_nonzero, EigenOptions};
use bochner_core::Error;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use serde::Serialize;

create_exception!(spectra_bochner, BochnerError, PyException, "Base class for library errors.");
create_exception!(spectra_bochner, InputError, BochnerError, "Invalid input, descriptor, mesh or config.");
create_exception!(spectra_bochner, NumericalError, BochnerError, "A numerical step failed.");
create_exception!(spectra_bochner, AssertionFailed, BochnerError, "A verification suite reported failures.");

fn err(e: Error) -> PyErr {
    let msg = format!("{}: {e}", e.kind());
    match e.exit_code() {
        1 => AssertionFailed::new_err(msg),
        2 => InputError::new_err(msg),
        _ => NumericalError::new_err(msg),
    }
}

trait OrPy<T> {
    fn py_err(self) -> PyResult<T>;
}

impl<T> OrPy<T> for bochner_core::Result<T> {
    fn py_err(self) -> PyResult<T> {
        self.map_err(err)
    }
}

fn to_py<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| NumericalError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn point(chart: usize, coords: Vec<f64>) -> ManifoldPoint {
    ManifoldPoint::new(chart, coords)
}

/// Chart-based manifold from a descriptor such as `"torus3:perturb=mix,eps=0.1"`
/// or `"sphere:n=4,K=1"`.
#[pyclass(name = "Manifold", module = "spectra_bochner", frozen)]
struct PyManifold {
    inner: ChartManifold,
}

#[pymethods]
impl PyManifold {
    #[new]
    fn new(descriptor: &str) -> PyResult<Self> {
        Ok(PyManifold { inner: ChartManifold::parse(descriptor).py_err()? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.label().to_string()
    }

    /// Deterministic sample points as `(chart, coords)` pairs.
    #[pyo3(signature = (count, seed = 42))]
    fn sample_points(&self, count: usize, seed: u64) -> Vec<(usize, Vec<f64>)> {
        self.inner.sample_points(count, seed).into_iter().map(|p| (p.chart, p.coords)).collect()
    }

    /// Curvature tensors in an orthonormal frame at one point.
    fn curvature<'py>(&self, py: Python<'py>, chart: usize, coords: Vec<f64>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &curvature_at(&self.inner, &point(chart, coords)).py_err()?)
    }

    /// Sampled lower bounds `(K0, L0)` for sectional and Ricci curvature.
    #[pyo3(signature = (points = 200, planes_per_point = 6, seed = 42))]
    fn curvature_bounds(&self, py: Python<'_>, points: usize, planes_per_point: usize, seed: u64) -> PyResult<(f64, f64)> {
        let plan = SamplePlan::new(points, planes_per_point, seed);
        py.detach(|| Ok((min_sectional(&self.inner, &plan)?, min_ricci(&self.inner, &plan)?))).py_err()
    }

    fn __repr__(&self) -> String {
        format!("Manifold('{}')", self.inner.label())
    }
}

/// Hypersurface of a space form, e.g. `"ellipsoid:1,1,1.1"` or
/// `"geodesic-sphere:kappa=-1,alpha=2,n=2"`.
#[pyclass(name = "Hypersurface", module = "spectra_bochner", frozen)]
struct PyHypersurface {
    inner: ImmersedHypersurface,
}

#[pymethods]
impl PyHypersurface {
    #[new]
    fn new(descriptor: &str) -> PyResult<Self> {
        Ok(PyHypersurface { inner: ImmersedHypersurface::parse(descriptor).py_err()? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn kappa(&self) -> f64 {
        self.inner.kappa()
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.label().to_string()
    }

    /// The induced metric as a `Manifold`.
    fn induced(&self) -> PyManifold {
        PyManifold { inner: self.inner.induced().clone() }
    }

    /// Shape operator, principal curvatures and mean curvature at a point.
    fn shape<'py>(&self, py: Python<'py>, chart: usize, coords: Vec<f64>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.shape_at(&point(chart, coords)).py_err()?)
    }

    /// Sampled `alpha`, `a` and `sigma`.
    #[pyo3(signature = (points = 400, seed = 42))]
    fn pinching_constants<'py>(&self, py: Python<'py>, points: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
        let pc = py.detach(|| self.inner.pinching_constants(&SamplePlan::new(points, 0, seed))).py_err()?;
        to_py(py, &pc)
    }

    fn __repr__(&self) -> String {
        format!("Hypersurface('{}')", self.inner.label())
    }
}

/// `□f = tr(φ Hess f)` for a symmetric tensor field `φ`.
#[pyclass(name = "BoxOperator", module = "spectra_bochner", frozen)]
struct PyBoxOperator {
    inner: CoreBox,
}

#[pymethods]
impl PyBoxOperator {
    /// `φ` from a tensor descriptor: `metric`, `ricci`, `schouten`,
    /// `einstein`, `custom:random[,seed=,amp=]`, ...
    #[new]
    fn new(manifold: &PyManifold, phi: &str) -> PyResult<Self> {
        let m = &manifold.inner;
        let inner = if phi == "schouten" {
            CoreBox::schouten(m).py_err()?
        } else {
            CoreBox::custom(m, parse_tensor(phi, m.dim()).py_err()?)
        };
        Ok(PyBoxOperator { inner })
    }

    #[staticmethod]
    fn laplacian(manifold: &PyManifold) -> Self {
        PyBoxOperator { inner: CoreBox::laplacian(&manifold.inner) }
    }

    /// `L1`, with `φ = P1 = H g − h` on the induced metric.
    #[staticmethod]
    fn newton_l1(surface: &PyHypersurface) -> Self {
        PyBoxOperator { inner: CoreBox::newton_l1(&surface.inner) }
    }

    #[getter]
    fn manifold(&self) -> PyManifold {
        PyManifold { inner: self.inner.manifold.clone() }
    }

    /// `□f` at a point; `field` is `generic`, `harmonic:i` or `const:v`.
    fn apply(&self, field: &str, chart: usize, coords: Vec<f64>) -> PyResult<f64> {
        self.inner.apply(&ScalarField::parse(field).py_err()?, &point(chart, coords)).py_err()
    }

    /// Both sides and every term of the Bochner identity, one dict per `c`.
    #[pyo3(signature = (field, chart, coords, cs = vec![0.0, 1.0, 7.3]))]
    fn bochner_residual<'py>(
        &self,
        py: Python<'py>,
        field: &str,
        chart: usize,
        coords: Vec<f64>,
        cs: Vec<f64>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let f = ScalarField::parse(field).py_err()?;
        to_py(py, &self.inner.bochner_residual(&f, &point(chart, coords), &cs).py_err()?)
    }

    /// `Σ φ_ij f_jk f_ki − (□f)² / tr φ`, nonnegative for positive definite `φ`.
    fn hessian_trace_defect(&self, field: &str, chart: usize, coords: Vec<f64>) -> PyResult<f64> {
        self.inner.hessian_trace_defect(&ScalarField::parse(field).py_err()?, &point(chart, coords)).py_err()
    }

    /// Gap between the trace form and the divergence form of `□f`.
    fn divergence_form_defect(&self, field: &str, chart: usize, coords: Vec<f64>) -> PyResult<f64> {
        self.inner.divergence_form_defect(&ScalarField::parse(field).py_err()?, &point(chart, coords)).py_err()
    }
}

/// Closed triangle mesh.
#[pyclass(name = "Mesh", module = "spectra_bochner", frozen)]
struct PyMesh {
    inner: SurfaceMesh,
}

#[pymethods]
impl PyMesh {
    #[new]
    fn new(vertices: Vec<[f64; 3]>, faces: Vec<[usize; 3]>) -> PyResult<Self> {
        Ok(PyMesh { inner: SurfaceMesh::new(vertices, faces).py_err()? })
    }

    #[staticmethod]
    #[pyo3(signature = (subdiv, radius = 1.0))]
    fn icosphere(subdiv: usize, radius: f64) -> Self {
        PyMesh { inner: SurfaceMesh::icosphere(subdiv, radius) }
    }

    #[staticmethod]
    fn read_off(path: &str) -> PyResult<Self> {
        Ok(PyMesh { inner: SurfaceMesh::read_off(path).py_err()? })
    }

    #[staticmethod]
    fn from_off(text: &str) -> PyResult<Self> {
        Ok(PyMesh { inner: SurfaceMesh::from_off_str(text).py_err()? })
    }

    fn to_off(&self) -> String {
        self.inner.to_off_string()
    }

    #[getter]
    fn vertices(&self) -> Vec<[f64; 3]> {
        self.inner.vertices().to_vec()
    }

    #[getter]
    fn faces(&self) -> Vec<[usize; 3]> {
        self.inner.faces().to_vec()
    }

    fn stats<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.stats())
    }

    /// Smallest nonzero eigenvalues of the Laplacian (`"laplacian"`) or of
    /// `L1` with vertex-normal shape operators (`"newton1"`).
    #[pyo3(signature = (operator = "laplacian", k = 5, tol = 1e-9, seed = 42, quadrature = "barycentric"))]
    fn eigenvalues<'py>(
        &self,
        py: Python<'py>,
        operator: &str,
        k: usize,
        tol: f64,
        seed: u64,
        quadrature: &str,
    ) -> PyResult<Bound<'py, PyAny>> {
        let coef = match operator {
            "laplacian" => MeshCoefficient::Metric,
            "newton1" => MeshCoefficient::VertexNormalNewton1,
            other => return Err(InputError::new_err(format!("unknown operator '{other}' (laplacian|newton1)"))),
        };
        solve(py, &self.inner, &coef, k, tol, seed, quadrature)
    }

    fn __repr__(&self) -> String {
        format!("Mesh({} vertices, {} faces)", self.inner.vertices().len(), self.inner.faces().len())
    }
}

fn solve<'py>(
    py: Python<'py>,
    mesh: &SurfaceMesh,
    coef: &MeshCoefficient,
    k: usize,
    tol: f64,
    seed: u64,
    quadrature: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let rule = Quadrature::parse(quadrature).py_err()?;
    let opts = EigenOptions::new(k, tol).with_seed(seed);
    let r = py.detach(|| smallest_nonzero(&assemble_mesh(mesh, coef, rule)?, &opts)).py_err()?;
    let out = serde_json::json!({
        "eigenvalues": r.eigenvalues,
        "residuals": r.residuals,
        "scaled_residuals": r.scaled_residuals,
        "diagnostics": r.diagnostics,
        "operator": coef.label(),
        "mesh": mesh.stats(),
    });
    to_py(py, &out)
}

/// Smallest nonzero eigenvalues of `L1` (or the Laplacian) on an icosphere
/// mesh of a two-dimensional surface descriptor.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (surface, subdiv = 4, operator = "newton1", k = 5, tol = 1e-9, seed = 42, quadrature = "barycentric"))]
fn surface_eigenvalues<'py>(
    py: Python<'py>,
    surface: &str,
    subdiv: usize,
    operator: &str,
    k: usize,
    tol: f64,
    seed: u64,
    quadrature: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let hs = ImmersedHypersurface::parse(surface).py_err()?;
    let (mesh, newton) = l1_mesh_problem(&hs, subdiv).py_err()?;
    let coef = match operator {
        "laplacian" => MeshCoefficient::Metric,
        "newton1" => newton,
        other => return Err(InputError::new_err(format!("unknown operator '{other}' (laplacian|newton1)"))),
    };
    solve(py, &mesh, &coef, k, tol, seed, quadrature)
}

/// Lower bound for the first eigenvalue of the Schouten operator.
#[pyfunction]
#[pyo3(signature = (n, r, k0, l0))]
fn schouten_bound(n: usize, r: f64, k0: f64, l0: f64) -> PyResult<f64> {
    core_schouten_bound(&SchoutenBoundInput::new(n, r, k0, l0)).py_err()
}

/// Lower bound for the first eigenvalue of `L1` on a convex hypersurface.
#[pyfunction]
#[pyo3(signature = (n, kappa, alpha, a = 1.0, sigma = 0.0))]
fn newton_bound(n: usize, kappa: f64, alpha: f64, a: f64, sigma: f64) -> PyResult<f64> {
    core_newton_bound(&NewtonBoundInput::new(n, kappa, alpha, a, sigma)).py_err()
}

fn mu_source(mu: f64, error_estimate: Option<f64>) -> MuSource {
    match error_estimate {
        Some(e) => MuSource::Computed { value: mu, error_estimate: e },
        None => MuSource::Analytic { value: mu },
    }
}

/// Compare a first eigenvalue with the Schouten bound; returns the full report.
#[pyfunction]
#[pyo3(signature = (n, r, k0, l0, mu, error_estimate = None))]
fn schouten_report<'py>(
    py: Python<'py>,
    n: usize,
    r: f64,
    k0: f64,
    l0: f64,
    mu: f64,
    error_estimate: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let input = BoundInput::Schouten(SchoutenBoundInput::new(n, r, k0, l0));
    to_py(py, &compare(&input, mu_source(mu, error_estimate)).py_err()?)
}

/// Compare a first eigenvalue with the `L1` bound; returns the full report.
#[pyfunction]
#[pyo3(signature = (n, kappa, alpha, mu, a = 1.0, sigma = 0.0, error_estimate = None))]
#[allow(clippy::too_many_arguments)]
fn newton_report<'py>(
    py: Python<'py>,
    n: usize,
    kappa: f64,
    alpha: f64,
    mu: f64,
    a: f64,
    sigma: f64,
    error_estimate: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let input = BoundInput::NewtonL1(NewtonBoundInput::new(n, kappa, alpha, a, sigma));
    to_py(py, &compare(&input, mu_source(mu, error_estimate)).py_err()?)
}

/// Refinement study of `μ1(L1)` against the bound with sampled constants.
#[pyfunction]
#[pyo3(signature = (surface, levels = vec![3, 4, 5], samples = 400, seed = 42, tol = 1e-9))]
fn compare_surface<'py>(
    py: Python<'py>,
    surface: &str,
    levels: Vec<usize>,
    samples: usize,
    seed: u64,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let hs = ImmersedHypersurface::parse(surface).py_err()?;
    let opts = EigenOptions::new(1, tol).with_seed(seed);
    let plan = SamplePlan::new(samples, 0, seed);
    let cmp = py
        .detach(|| core_compare_surface(&hs, &levels, &opts, Quadrature::Barycentric, &plan))
        .py_err()?;
    let out = to_py(py, &cmp)?;
    out.set_item("csv", cmp.to_csv())?;
    Ok(out)
}

fn trial_config(trials: usize, seed: u64, dim_min: usize, dim_max: usize, widen: bool) -> PyResult<TrialConfig> {
    if dim_min < 2 || dim_min > dim_max {
        return Err(InputError::new_err(format!("dimension range {dim_min}..={dim_max} is invalid")));
    }
    Ok(TrialConfig { trials, seed, dim_min, dim_max, widen, ..TrialConfig::default() })
}

/// Randomized trials of the generalized Newton inequality.
#[pyfunction]
#[pyo3(signature = (trials = 100_000, seed = 42, dim_min = 2, dim_max = 8))]
fn newton_trials<'py>(py: Python<'py>, trials: usize, seed: u64, dim_min: usize, dim_max: usize) -> PyResult<Bound<'py, PyAny>> {
    let cfg = trial_config(trials, seed, dim_min, dim_max, false)?;
    let r = py.detach(|| newton_inequality_trials(&cfg));
    to_py(py, &r)
}

/// Randomized trials of the `Q(A)` eigenvalue bound; `widen` plants a violation.
#[pyfunction]
#[pyo3(signature = (trials = 100_000, seed = 42, dim_min = 2, dim_max = 8, widen = false))]
fn qa_trials<'py>(
    py: Python<'py>,
    trials: usize,
    seed: u64,
    dim_min: usize,
    dim_max: usize,
    widen: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = trial_config(trials, seed, dim_min, dim_max, widen)?;
    let r = py.detach(|| qa_bound_trials(&cfg));
    to_py(py, &r)
}

/// Run the suites named in a TOML config string and return the summary.
/// Failing assertions are reported in the summary, not raised.
#[pyfunction]
fn run_suite<'py>(py: Python<'py>, config: &str) -> PyResult<Bound<'py, PyAny>> {
    let cfg = RunConfig::from_toml_str(config).py_err()?;
    let s = py.detach(|| bochner_core::harness::run_suite(&cfg)).py_err()?;
    to_py(py, &s)
}

#[pymodule]
fn spectra_bochner(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("BochnerError", py.get_type::<BochnerError>())?;
    m.add("InputError", py.get_type::<InputError>())?;
    m.add("NumericalError", py.get_type::<NumericalError>())?;
    m.add("AssertionFailed", py.get_type::<AssertionFailed>())?;
    m.add_class::<PyManifold>()?;
    m.add_class::<PyHypersurface>()?;
    m.add_class::<PyBoxOperator>()?;
    m.add_class::<PyMesh>()?;
    m.add_function(wrap_pyfunction!(surface_eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(schouten_bound, m)?)?;
    m.add_function(wrap_pyfunction!(newton_bound, m)?)?;
    m.add_function(wrap_pyfunction!(schouten_report, m)?)?;
    m.add_function(wrap_pyfunction!(newton_report, m)?)?;
    m.add_function(wrap_pyfunction!(compare_surface, m)?)?;
    m.add_function(wrap_pyfunction!(newton_trials, m)?)?;
    m.add_function(wrap_pyfunction!(qa_trials, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    Ok(())
}
