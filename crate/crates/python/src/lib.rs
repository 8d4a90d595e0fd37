//! Python bindings. The surface mirrors the CLI: build a mesh, solve one
//! refinement level, or run a whole study from the same JSON config format.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ifem::analysis::{self, RateFit, StudyRow};
use ifem::meshgen::{quality_report, Mesh as CoreMesh};
use ifem::solver::SolverConfig;
use ifem::study::{compute_study, csv_contents, markdown_report, ProblemKind, StudyConfig};

fn to_py_err(e: ifem::error::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn kind_from(name: &str, b1: f64, b2: f64, interface: f64) -> PyResult<ProblemKind> {
    let kind = match name {
        "radial" => ProblemKind::Radial {
            b1,
            b2,
            r0: interface,
        },
        "line" => ProblemKind::Line {
            b1,
            b2,
            x0: interface,
        },
        "smooth" => ProblemKind::Smooth,
        "radial_unfitted" => ProblemKind::RadialUnfitted {
            b1,
            b2,
            r0: interface,
        },
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown problem '{other}'; expected radial, line, smooth, or radial_unfitted"
            )))
        }
    };
    Ok(kind)
}

/// Triangulation handle: coordinates, connectivity, and quality numbers.
#[pyclass(name = "Mesh", frozen)]
struct PyMesh {
    inner: CoreMesh,
}

#[pymethods]
impl PyMesh {
    #[getter]
    fn h(&self) -> f64 {
        self.inner.h
    }

    #[getter]
    fn n_vertices(&self) -> usize {
        self.inner.n_vertices()
    }

    #[getter]
    fn n_triangles(&self) -> usize {
        self.inner.n_triangles()
    }

    fn vertices(&self) -> Vec<(f64, f64)> {
        self.inner.vertices.iter().map(|p| (p.x, p.y)).collect()
    }

    fn triangles(&self) -> Vec<(usize, usize, usize)> {
        self.inner
            .triangles
            .iter()
            .map(|t| (t[0], t[1], t[2]))
            .collect()
    }

    fn quality<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let q = quality_report(&self.inner);
        let d = PyDict::new(py);
        d.set_item("h", q.h)?;
        d.set_item("min_inradius_ratio", q.min_inradius_ratio)?;
        d.set_item("n_regular", q.n_regular)?;
        d.set_item("n_irregular", q.n_irregular)?;
        d.set_item(
            "irregular_two_vertices_on_interface",
            q.irregular_two_vertices_on_interface,
        )?;
        Ok(d)
    }

    fn node_file(&self) -> String {
        ifem::mesh_io::node_file_contents(&self.inner)
    }

    fn ele_file(&self) -> String {
        ifem::mesh_io::ele_file_contents(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "Mesh(h={:.4e}, vertices={}, triangles={})",
            self.inner.h,
            self.inner.n_vertices(),
            self.inner.n_triangles()
        )
    }
}

fn row_dict<'py>(py: Python<'py>, row: &StudyRow) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("h", row.err_uh.h)?;
    d.set_item("dofs", row.err_uh.dof_count)?;
    d.set_item("l2_uh", row.err_uh.l2)?;
    d.set_item("h1_uh", row.err_uh.h1)?;
    d.set_item("h1_uh_regular", row.err_uh.h1_regular)?;
    d.set_item("h1_uh_irregular", row.err_uh.h1_irregular)?;
    d.set_item("l2_uI", row.err_ui.l2)?;
    d.set_item("h1_uI", row.err_ui.h1)?;
    d.set_item("cea_ratio", row.cea_ratio)?;
    d.set_item("cg_iters", row.stats.iterations)?;
    Ok(d)
}

fn fit_dict<'py>(py: Python<'py>, fit: &RateFit) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("slope", fit.slope)?;
    d.set_item("slope_with_log", fit.slope_with_log)?;
    d.set_item("residual_pure", fit.residual_pure)?;
    d.set_item("residual_log", fit.residual_log)?;
    Ok(d)
}

/// Builds the interface-fitted (or deliberately unfitted) mesh for a named
/// problem at a target mesh size.
#[pyfunction]
#[pyo3(signature = (problem, h, b1 = 1.0, b2 = 100.0, interface = 0.5))]
fn build_mesh(problem: &str, h: f64, b1: f64, b2: f64, interface: f64) -> PyResult<PyMesh> {
    let kind = kind_from(problem, b1, b2, interface)?;
    let spec = kind.build_problem().map_err(to_py_err)?;
    let mesh = kind.build_mesh(&spec, h).map_err(to_py_err)?;
    Ok(PyMesh { inner: mesh })
}

/// Solves one refinement level and returns the error-norm row as a dict with
/// the same keys as the study CSV columns.
#[pyfunction]
#[pyo3(signature = (problem, h, b1 = 1.0, b2 = 100.0, interface = 0.5))]
fn solve<'py>(
    py: Python<'py>,
    problem: &str,
    h: f64,
    b1: f64,
    b2: f64,
    interface: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let config = StudyConfig {
        problem: kind_from(problem, b1, b2, interface)?,
        h_values: vec![h],
        solver: SolverConfig::default(),
        output_dir: std::env::temp_dir(),
        emit_mesh: false,
    };
    config.validate().map_err(to_py_err)?;
    let (table, _) = compute_study(&config).map_err(to_py_err)?;
    row_dict(py, &table.rows[0])
}

/// Runs a convergence study from the JSON config format the CLI accepts.
/// Returns rows, fitted slopes, and the rendered CSV and Markdown report.
/// Nothing is written to disk.
#[pyfunction]
fn run_study<'py>(py: Python<'py>, config_json: &str) -> PyResult<Bound<'py, PyDict>> {
    let config = StudyConfig::from_json(config_json).map_err(to_py_err)?;
    let (table, _) = compute_study(&config).map_err(to_py_err)?;

    let rows = table
        .rows
        .iter()
        .map(|row| row_dict(py, row))
        .collect::<PyResult<Vec<_>>>()?;
    let fits = PyDict::new(py);
    for (name, fit) in [
        ("l2_uh", &table.fits.l2_uh),
        ("h1_uh", &table.fits.h1_uh),
        ("h1_uh_regular", &table.fits.h1_uh_regular),
        ("h1_uh_irregular", &table.fits.h1_uh_irregular),
        ("l2_uI", &table.fits.l2_ui),
        ("h1_uI", &table.fits.h1_ui),
        ("h1_uI_regular", &table.fits.h1_ui_regular),
        ("h1_uI_irregular", &table.fits.h1_ui_irregular),
    ] {
        match fit {
            Some(f) => fits.set_item(name, fit_dict(py, f)?)?,
            None => fits.set_item(name, py.None())?,
        }
    }

    let out = PyDict::new(py);
    out.set_item("rows", rows)?;
    out.set_item("fits", fits)?;
    out.set_item("csv", csv_contents(&table))?;
    out.set_item("report", markdown_report(&config, &table))?;
    Ok(out)
}

/// Least-squares convergence rate from (h, error) pairs, fitted both as a
/// pure power law and with a |ln h|^(1/2) correction factor.
#[pyfunction]
fn fit_rate<'py>(py: Python<'py>, pairs: Vec<(f64, f64)>) -> PyResult<Bound<'py, PyDict>> {
    let fit = analysis::fit_rate(&pairs).map_err(to_py_err)?;
    fit_dict(py, &fit)
}

/// The interpolation-estimate exponent 1/(2 |ln h|) minimizing
/// h^(1-eps) / sqrt(eps) over eps in (0, 1/2].
#[pyfunction]
fn epsilon_star(h: f64) -> PyResult<f64> {
    analysis::epsilon_star(h).map_err(to_py_err)
}

/// The tradeoff function h^(1-eps) / sqrt(eps) itself.
#[pyfunction]
fn epsilon_tradeoff(h: f64, eps: f64) -> f64 {
    analysis::epsilon_tradeoff(h, eps)
}

#[pymodule]
fn ifem_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMesh>()?;
    m.add_function(wrap_pyfunction!(build_mesh, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(run_study, m)?)?;
    m.add_function(wrap_pyfunction!(fit_rate, m)?)?;
    m.add_function(wrap_pyfunction!(epsilon_star, m)?)?;
    m.add_function(wrap_pyfunction!(epsilon_tradeoff, m)?)?;
    m.add("CSV_HEADER", ifem::study::CSV_HEADER)?;
    Ok(())
}
