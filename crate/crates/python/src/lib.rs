//! Python bindings: `import cco`.
//!
//! ```python
//! import cco
//! params = cco.Params(k_term=100, seed=1)
//! tree = cco.grow(params, cco.Domain.disk([0.0, 0.0], 1.0))
//! print(tree.validate(cco.Domain.disk([0.0, 0.0], 1.0)))
//! ```

use std::path::PathBuf;

use cco_core::io::{format_svg, format_tree, load_mask, parse_tree, read_tree, write_tree};
use cco_core::{
    CcoError, CcoParams, GrowOptions, LocalBifurcationProblem, PerfusionDomain, Point, SolverSettings, TreeReport,
    VesselTree,
};
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(cco, Error, PyException, "Any failure reported by the generator.");
create_exception!(cco, GrowthStalled, Error, "Too many consecutive candidates were discarded.");
create_exception!(cco, TreeFormatError, Error, "A tree file failed to parse or is inconsistent.");

fn err(e: CcoError) -> PyErr {
    let msg = e.to_string();
    match e {
        CcoError::GrowthStalled { .. } => GrowthStalled::new_err(msg),
        CcoError::TreeFormat { .. } => TreeFormatError::new_err(msg),
        _ => Error::new_err(msg),
    }
}

fn point(coords: Vec<f64>) -> PyResult<Point> {
    Point::from_slice(&coords).map_err(err)
}

/// Growth parameters. Every field is a keyword argument and a read/write attribute;
/// omitted fields take the library defaults.
#[pyclass(name = "Params", module = "cco", get_all, set_all, from_py_object)]
#[derive(Clone)]
struct PyParams {
    k_term: usize,
    q_perf: f64,
    p_perf: f64,
    p_term: f64,
    mu: f64,
    gamma: f64,
    n_con: usize,
    eta: f64,
    seed: u64,
    tol: f64,
    max_iter: usize,
    dim: usize,
    clearance_margin: f64,
    discard_cap: usize,
    relax_factor: f64,
    relax_every: usize,
}

impl From<&CcoParams> for PyParams {
    fn from(p: &CcoParams) -> Self {
        PyParams {
            k_term: p.k_term,
            q_perf: p.q_perf,
            p_perf: p.p_perf,
            p_term: p.p_term,
            mu: p.mu,
            gamma: p.gamma,
            n_con: p.n_con,
            eta: p.eta,
            seed: p.seed,
            tol: p.tol,
            max_iter: p.max_iter,
            dim: p.dim,
            clearance_margin: p.clearance_margin,
            discard_cap: p.discard_cap,
            relax_factor: p.relax_factor,
            relax_every: p.relax_every,
        }
    }
}

impl From<&PyParams> for CcoParams {
    fn from(p: &PyParams) -> Self {
        CcoParams {
            k_term: p.k_term,
            q_perf: p.q_perf,
            p_perf: p.p_perf,
            p_term: p.p_term,
            mu: p.mu,
            gamma: p.gamma,
            n_con: p.n_con,
            eta: p.eta,
            seed: p.seed,
            tol: p.tol,
            max_iter: p.max_iter,
            dim: p.dim,
            clearance_margin: p.clearance_margin,
            discard_cap: p.discard_cap,
            relax_factor: p.relax_factor,
            relax_every: p.relax_every,
        }
    }
}

#[pymethods]
impl PyParams {
    #[new]
    #[pyo3(signature = (k_term, *, q_perf=None, p_perf=None, p_term=None, mu=None, gamma=None, n_con=None, eta=None, seed=None, tol=None, max_iter=None, dim=None, clearance_margin=None, discard_cap=None, relax_factor=None, relax_every=None))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        k_term: usize,
        q_perf: Option<f64>,
        p_perf: Option<f64>,
        p_term: Option<f64>,
        mu: Option<f64>,
        gamma: Option<f64>,
        n_con: Option<usize>,
        eta: Option<f64>,
        seed: Option<u64>,
        tol: Option<f64>,
        max_iter: Option<usize>,
        dim: Option<usize>,
        clearance_margin: Option<f64>,
        discard_cap: Option<usize>,
        relax_factor: Option<f64>,
        relax_every: Option<usize>,
    ) -> Self {
        let d = CcoParams::default();
        PyParams {
            k_term,
            q_perf: q_perf.unwrap_or(d.q_perf),
            p_perf: p_perf.unwrap_or(d.p_perf),
            p_term: p_term.unwrap_or(d.p_term),
            mu: mu.unwrap_or(d.mu),
            gamma: gamma.unwrap_or(d.gamma),
            n_con: n_con.unwrap_or(d.n_con),
            eta: eta.unwrap_or(d.eta),
            seed: seed.unwrap_or(d.seed),
            tol: tol.unwrap_or(d.tol),
            max_iter: max_iter.unwrap_or(d.max_iter),
            dim: dim.unwrap_or(d.dim),
            clearance_margin: clearance_margin.unwrap_or(d.clearance_margin),
            discard_cap: discard_cap.unwrap_or(d.discard_cap),
            relax_factor: relax_factor.unwrap_or(d.relax_factor),
            relax_every: relax_every.unwrap_or(d.relax_every),
        }
    }

    /// Raises if any parameter is out of range.
    fn validate(&self) -> PyResult<()> {
        CcoParams::from(self).validate().map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("{:?}", CcoParams::from(self))
    }
}

/// Perfusion domain.
#[pyclass(name = "Domain", module = "cco", from_py_object)]
#[derive(Clone)]
struct PyDomain {
    inner: PerfusionDomain,
}

#[pymethods]
impl PyDomain {
    #[staticmethod]
    fn disk(center: Vec<f64>, radius: f64) -> PyResult<Self> {
        let inner = PerfusionDomain::disk(point(center)?, radius).map_err(err)?;
        Ok(PyDomain { inner })
    }

    #[staticmethod]
    fn sphere(center: Vec<f64>, radius: f64) -> PyResult<Self> {
        let inner = PerfusionDomain::sphere(point(center)?, radius).map_err(err)?;
        Ok(PyDomain { inner })
    }

    #[staticmethod]
    #[pyo3(name = "box")]
    fn cuboid(lo: Vec<f64>, hi: Vec<f64>) -> PyResult<Self> {
        let inner = PerfusionDomain::cuboid(point(lo)?, point(hi)?).map_err(err)?;
        Ok(PyDomain { inner })
    }

    /// Voxel mask from a `.maskmeta` header and a raw or PGM occupancy file.
    #[staticmethod]
    fn mask(meta: PathBuf, data: PathBuf) -> PyResult<Self> {
        let mask = load_mask(&meta, &data).map_err(err)?;
        Ok(PyDomain {
            inner: PerfusionDomain::mask(mask),
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn contains(&self, p: Vec<f64>) -> PyResult<bool> {
        self.inner.contains(&point(p)?).map_err(err)
    }

    fn measure(&self) -> f64 {
        self.inner.measure()
    }

    fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let (lo, hi) = self.inner.bounding_box();
        (lo.coords().to_vec(), hi.coords().to_vec())
    }
}

fn report_dict<'py>(py: Python<'py>, r: &TreeReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("terminal_count", r.terminal_count)?;
    d.set_item("segment_count", r.segment_count)?;
    d.set_item("total_volume", r.total_volume)?;
    d.set_item("max_murray_residual", r.max_murray_residual)?;
    d.set_item("max_terminal_pressure_error", r.max_terminal_pressure_error)?;
    d.set_item("min_clearance_margin", r.min_clearance_margin)?;
    d.set_item("all_inside_domain", r.all_inside_domain)?;
    d.set_item("max_depth", r.max_depth)?;
    d.set_item("passes", r.passes())?;
    Ok(d)
}

/// A grown vascular tree.
#[pyclass(name = "Tree", module = "cco", from_py_object)]
#[derive(Clone)]
struct PyTree {
    inner: VesselTree,
}

#[pymethods]
impl PyTree {
    /// Reads a tree file; radii are realized from `params`.
    #[staticmethod]
    fn read(path: PathBuf, params: &PyParams) -> PyResult<Self> {
        let inner = read_tree(&path, &params.into()).map_err(err)?;
        Ok(PyTree { inner })
    }

    #[staticmethod]
    fn from_csv(text: &str, params: &PyParams) -> PyResult<Self> {
        let inner = parse_tree(text, &params.into()).map_err(err)?;
        Ok(PyTree { inner })
    }

    fn write(&self, path: PathBuf) -> PyResult<()> {
        write_tree(&self.inner, &path).map_err(err)
    }

    fn to_csv(&self) -> PyResult<String> {
        format_tree(&self.inner).map_err(err)
    }

    fn to_svg(&self, domain: &PyDomain) -> PyResult<String> {
        format_svg(&self.inner, &domain.inner).map_err(err)
    }

    #[getter]
    fn segment_count(&self) -> usize {
        self.inner.segment_count()
    }

    #[getter]
    fn terminal_count(&self) -> usize {
        self.inner.terminal_count()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn params(&self) -> PyParams {
        self.inner.params().into()
    }

    fn volume(&self) -> PyResult<f64> {
        self.inner.volume().map_err(err)
    }

    /// Checks the tree against `domain` and returns the report as a dict.
    fn validate<'py>(&self, py: Python<'py>, domain: &PyDomain) -> PyResult<Bound<'py, PyDict>> {
        let r = self.inner.validate(&domain.inner).map_err(err)?;
        report_dict(py, &r)
    }

    /// One dict per segment in arena order.
    fn segments<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        self.inner
            .ids()
            .map(|id| {
                let s = self.inner.segment(id);
                let d = PyDict::new(py);
                d.set_item("id", id.0)?;
                d.set_item("parent", s.parent.map(|p| p.0))?;
                d.set_item("children", s.children.map(|[a, b]| (a.0, b.0)))?;
                d.set_item("proximal", s.proximal.coords().to_vec())?;
                d.set_item("distal", s.distal.coords().to_vec())?;
                d.set_item("radius", s.radius)?;
                d.set_item("beta", s.beta)?;
                d.set_item("flow", self.inner.flow(id))?;
                Ok(d)
            })
            .collect()
    }
}

/// Grows a tree to `params.k_term` terminals, optionally continuing `seed_tree`.
#[pyfunction]
#[pyo3(signature = (params, domain, seed_tree=None, threads=1, root=None))]
fn grow(
    py: Python<'_>,
    params: &PyParams,
    domain: &PyDomain,
    seed_tree: Option<PyTree>,
    threads: usize,
    root: Option<Vec<f64>>,
) -> PyResult<PyTree> {
    let options = GrowOptions {
        threads,
        root: root.map(point).transpose()?,
    };
    let (p, d, seed) = (CcoParams::from(params), domain.inner.clone(), seed_tree.map(|t| t.inner));
    let inner = py
        .detach(move || cco_core::grow_with(&p, &d, seed, &options, None))
        .map_err(err)?;
    Ok(PyTree { inner })
}

#[allow(clippy::too_many_arguments)]
fn problem(
    x0: Vec<f64>,
    x1: Vec<f64>,
    x2: Vec<f64>,
    f1: f64,
    f2: f64,
    p0: f64,
    p1: f64,
    p2: f64,
    mu: f64,
    gamma: f64,
    min_length: f64,
) -> PyResult<LocalBifurcationProblem> {
    Ok(LocalBifurcationProblem {
        x0: point(x0)?,
        x1: point(x1)?,
        x2: point(x2)?,
        f1,
        f2,
        p0,
        p1,
        p2,
        mu,
        gamma,
        min_length,
    })
}

/// Radii and branching pressure of a bifurcation with a fixed branching point.
#[pyfunction]
#[pyo3(signature = (x0, x1, x2, x_b, f1, f2, p0, p1, p2, mu, gamma, min_length=1e-9, tol=1e-6))]
#[allow(clippy::too_many_arguments)]
fn solve_radii<'py>(
    py: Python<'py>,
    x0: Vec<f64>,
    x1: Vec<f64>,
    x2: Vec<f64>,
    x_b: Vec<f64>,
    f1: f64,
    f2: f64,
    p0: f64,
    p1: f64,
    p2: f64,
    mu: f64,
    gamma: f64,
    min_length: f64,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let prob = problem(x0, x1, x2, f1, f2, p0, p1, p2, mu, gamma, min_length)?;
    let r = cco_core::solve_radii(&prob, &point(x_b)?, tol).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("r0", r.r0)?;
    d.set_item("r1", r.r1)?;
    d.set_item("r2", r.r2)?;
    d.set_item("p_b", r.p_b)?;
    Ok(d)
}

/// Volume-optimal branching point of a single bifurcation.
#[pyfunction]
#[pyo3(signature = (x0, x1, x2, f1, f2, p0, p1, p2, mu, gamma, min_length=1e-9, tol=1e-6, max_iter=100))]
#[allow(clippy::too_many_arguments)]
fn optimal_bifurcation<'py>(
    py: Python<'py>,
    x0: Vec<f64>,
    x1: Vec<f64>,
    x2: Vec<f64>,
    f1: f64,
    f2: f64,
    p0: f64,
    p1: f64,
    p2: f64,
    mu: f64,
    gamma: f64,
    min_length: f64,
    tol: f64,
    max_iter: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let prob = problem(x0, x1, x2, f1, f2, p0, p1, p2, mu, gamma, min_length)?;
    let s = cco_core::optimal_bifurcation(&prob, &SolverSettings { tol, max_iter }).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("x_b", s.x_b.coords().to_vec())?;
    d.set_item("r0", s.r0)?;
    d.set_item("r1", s.r1)?;
    d.set_item("r2", s.r2)?;
    d.set_item("p_b", s.p_b)?;
    d.set_item("cost", s.cost)?;
    d.set_item("converged", s.converged)?;
    d.set_item("iterations", s.iterations)?;
    Ok(d)
}

#[pymodule]
fn cco(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyParams>()?;
    m.add_class::<PyDomain>()?;
    m.add_class::<PyTree>()?;
    m.add_function(wrap_pyfunction!(grow, m)?)?;
    m.add_function(wrap_pyfunction!(solve_radii, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_bifurcation, m)?)?;
    m.add("Error", m.py().get_type::<Error>())?;
    m.add("GrowthStalled", m.py().get_type::<GrowthStalled>())?;
    m.add("TreeFormatError", m.py().get_type::<TreeFormatError>())?;
    Ok(())
}
