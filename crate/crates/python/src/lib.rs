//! Python bindings: case construction, the PGD driver, the incremental FE
//! solver, the return map and the micro/macro decomposition.

use mtpgd_core::driver::DriverOutput;
use mtpgd_core::reference::Response;
use mtpgd_core::{
    assemble_stiffness, evaluate_field, make_waveform, probe, trial_and_return, CaseSpec, DriverOptions, Error,
    LoadWaveform, Material, Mesh, MultiTimeGrid, Quantity, StiffnessSystem, Voigt,
};
use nalgebra::DMatrix;
use numpy::ndarray::Array2;
use numpy::{IntoPyArray, PyArray1, PyArray2, PyReadonlyArray1};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidSpec(_)
        | Error::InconsistentSpec(_)
        | Error::InvalidMaterial(_)
        | Error::DimensionMismatch(_)
        | Error::Grid(_)
        | Error::OutsideMesh(..) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn dense<'py>(py: Python<'py>, m: &DMatrix<f64>) -> Bound<'py, PyArray2<f64>> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)]).into_pyarray(py)
}

fn quantity(name: &str) -> PyResult<Quantity> {
    Ok(match name {
        "sigma_xx" => Quantity::StressXX,
        "eps_xx" => Quantity::StrainXX,
        "eps_p_xx" => Quantity::PlasticStrainXX,
        "ebar_p" => Quantity::AccumulatedPlasticStrain,
        "ux" => Quantity::DisplacementX,
        "uy" => Quantity::DisplacementY,
        _ => return Err(PyValueError::new_err(format!("unknown quantity `{name}`"))),
    })
}

/// Mesh, factorized stiffness and loading waveform of one benchmark case.
#[pyclass(name = "Case", module = "mtpgd", frozen)]
struct PyCase {
    spec: CaseSpec,
    mesh: Mesh,
    sys: StiffnessSystem,
    waveform: LoadWaveform,
}

impl PyCase {
    fn build(spec: CaseSpec) -> PyResult<Self> {
        let mesh = spec.build_mesh().map_err(to_py)?;
        let sys = assemble_stiffness(&mesh, &Material::steel()).map_err(to_py)?;
        let waveform = make_waveform(&spec).map_err(to_py)?;
        Ok(PyCase { spec, mesh, sys, waveform })
    }
}

#[pymethods]
impl PyCase {
    /// `name` is one of `dogbone`, `dogbone_desk`, `plate`, `plate_desk`.
    #[new]
    #[pyo3(signature = (name, n_elements=None, n_times=None, n_cycles=None))]
    fn new(name: &str, n_elements: Option<usize>, n_times: Option<usize>, n_cycles: Option<usize>) -> PyResult<Self> {
        let mut spec = match name {
            "dogbone" => CaseSpec::dogbone(),
            "dogbone_desk" => CaseSpec::dogbone_desk(),
            "plate" => CaseSpec::cracked_plate(),
            "plate_desk" => CaseSpec::cracked_plate_desk(),
            _ => return Err(PyValueError::new_err(format!("unknown case `{name}`"))),
        };
        spec.n_elements = n_elements.unwrap_or(spec.n_elements);
        spec.n_times = n_times.unwrap_or(spec.n_times);
        spec.n_cycles = n_cycles.unwrap_or(spec.n_cycles);
        Self::build(spec)
    }

    #[getter]
    fn n_nodes(&self) -> usize {
        self.mesh.n_nodes()
    }

    #[getter]
    fn n_elements(&self) -> usize {
        self.mesh.n_elements()
    }

    #[getter]
    fn n_free(&self) -> usize {
        self.sys.n_free()
    }

    #[getter]
    fn n_cycles(&self) -> usize {
        self.spec.n_cycles
    }

    fn nodes<'py>(&self, py: Python<'py>) -> Bound<'py, PyArray2<f64>> {
        Array2::from_shape_fn((self.mesh.n_nodes(), 2), |(i, j)| self.mesh.nodes[i][j]).into_pyarray(py)
    }

    fn times<'py>(&self, py: Python<'py>) -> Bound<'py, PyArray1<f64>> {
        self.waveform.times.clone().into_pyarray(py)
    }

    fn waveform<'py>(&self, py: Python<'py>) -> Bound<'py, PyArray1<f64>> {
        self.waveform.values.clone().into_pyarray(py)
    }

    /// Space-time PGD with the fixed-point driver.
    #[pyo3(signature = (delta=1e-4, max_iters=50, anderson_depth=0, relaxation=1.0, eps_mode=None))]
    fn run(
        slf: Py<Self>,
        py: Python<'_>,
        delta: f64,
        max_iters: usize,
        anderson_depth: usize,
        relaxation: f64,
        eps_mode: Option<f64>,
    ) -> PyResult<PySolution> {
        let mut opts = DriverOptions { delta, max_iters, anderson_depth, relaxation, ..Default::default() };
        if let Some(e) = eps_mode {
            opts.pgd.eps_mode = e;
        }
        let case = slf.get();
        let out: DriverOutput = py.detach(|| mtpgd_core::run(&case.sys, &case.waveform, &opts)).map_err(to_py)?;
        let u = evaluate_field(&out.field, &case.sys, &case.waveform).map_err(to_py)?;
        Ok(PySolution {
            case: slf.clone_ref(py),
            response: Response { displacement: u, state: out.state },
            errors: out.report.errors,
            converged: out.report.converged,
            time_modes: out.field.time.iter().map(|l| l.iter().copied().collect()).collect(),
        })
    }

    /// Incremental FE reference with modified Newton at every step.
    #[pyo3(signature = (tol_eq=1e-8))]
    fn solve_incremental(slf: Py<Self>, py: Python<'_>, tol_eq: f64) -> PyResult<PySolution> {
        let case = slf.get();
        let sol = py.detach(|| mtpgd_core::solve_incremental(&case.sys, &case.waveform, tol_eq)).map_err(to_py)?;
        Ok(PySolution {
            case: slf.clone_ref(py),
            response: sol.response,
            errors: Vec::new(),
            converged: true,
            time_modes: Vec::new(),
        })
    }
}

/// Displacement history and plastic state of a finished solve.
#[pyclass(name = "Solution", module = "mtpgd", frozen)]
struct PySolution {
    case: Py<PyCase>,
    response: Response,
    errors: Vec<f64>,
    converged: bool,
    time_modes: Vec<Vec<f64>>,
}

#[pymethods]
impl PySolution {
    #[getter]
    fn converged(&self) -> bool {
        self.converged
    }

    /// Fixed-point error trace `e_1 .. e_L`; empty for the FE solver.
    #[getter]
    fn errors(&self) -> Vec<f64> {
        self.errors.clone()
    }

    #[getter]
    fn rank(&self) -> usize {
        self.time_modes.len()
    }

    /// Dense displacement history, one row per dof and one column per time node.
    fn displacement<'py>(&self, py: Python<'py>) -> Bound<'py, PyArray2<f64>> {
        dense(py, &self.response.displacement)
    }

    fn time_mode<'py>(&self, py: Python<'py>, k: usize) -> PyResult<Bound<'py, PyArray1<f64>>> {
        let m = self.time_modes.get(k).ok_or_else(|| PyValueError::new_err(format!("no time mode {k}")))?;
        Ok(m.clone().into_pyarray(py))
    }

    /// Time series of `quantity` at the Gauss point or node nearest to `(x, y)`.
    #[pyo3(signature = (x, y, quantity="sigma_xx"))]
    fn probe<'py>(&self, py: Python<'py>, x: f64, y: f64, quantity: &str) -> PyResult<Bound<'py, PyArray1<f64>>> {
        let case = self.case.get();
        let q = self::quantity(quantity)?;
        let v = probe(&case.sys, &case.mesh, &self.response, [x, y], q).map_err(to_py)?;
        Ok(v.into_pyarray(py))
    }
}

/// Radial return of one Gauss point for the steel of the benchmarks.
///
/// Tensors are `(xx, yy, zz, xy)` with engineering shear strain. Returns
/// `(eps_p, ebar, sigma, dlambda)`.
#[pyfunction]
fn return_map(
    eps: PyReadonlyArray1<'_, f64>,
    eps_p: PyReadonlyArray1<'_, f64>,
    ebar: f64,
) -> PyResult<(Vec<f64>, f64, Vec<f64>, f64)> {
    let voigt = |a: &PyReadonlyArray1<'_, f64>| -> PyResult<Voigt> {
        let s = a.as_slice()?;
        if s.len() != 4 {
            return Err(PyValueError::new_err(format!("expected 4 components, got {}", s.len())));
        }
        Ok(Voigt::from_column_slice(s))
    };
    let mat = Material::steel();
    let r = trial_and_return(&voigt(&eps)?, &voigt(&eps_p)?, ebar, &mat, &mat.elastic_matrix()).map_err(to_py)?;
    Ok((r.eps_p.iter().copied().collect(), r.ebar, r.sigma.iter().copied().collect(), r.dlambda))
}

/// Micro/macro separation `h(tau_i, T_j) ~ sum_k a_k(tau_i) b_k(T_j)`.
///
/// Returns `(micro, macro, residuals)` with one row per sub-mode.
#[pyfunction]
#[pyo3(signature = (h, n_tau, n_macro, tol=1e-6))]
fn decompose<'py>(
    py: Python<'py>,
    h: PyReadonlyArray1<'_, f64>,
    n_tau: usize,
    n_macro: usize,
    tol: f64,
) -> PyResult<(Bound<'py, PyArray2<f64>>, Bound<'py, PyArray2<f64>>, Vec<f64>)> {
    let grid = MultiTimeGrid::from_sizes(n_tau, n_macro).map_err(to_py)?;
    let m = mtpgd_core::decompose(h.as_slice()?, &grid, tol).map_err(to_py)?;
    let micro = Array2::from_shape_fn((m.n_submodes(), n_tau), |(k, i)| m.micro[k][i]).into_pyarray(py);
    let macro_ = Array2::from_shape_fn((m.n_submodes(), n_macro), |(k, j)| m.macro_[k][j]).into_pyarray(py);
    Ok((micro, macro_, m.residuals))
}

#[pymodule]
fn mtpgd(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCase>()?;
    m.add_class::<PySolution>()?;
    m.add_function(wrap_pyfunction!(return_map, m)?)?;
    m.add_function(wrap_pyfunction!(decompose, m)?)?;
    Ok(())
}
