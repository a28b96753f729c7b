//! Python bindings: operators, projectors, eta invariants, the cylinder index,
//! distribution pairings, Hadamard coefficients and the check runner.

use feynman_index::distributions::{self, DistributionQuery, Family, Strategy};
use feynman_index::error::Error;
use feynman_index::eta::{default_grid, eta_heat, eta_smeared, eta_zeta};
use feynman_index::hadamard::{self, CMat, FlatOperatorSpec};
use feynman_index::index;
use feynman_index::io;
use feynman_index::models::{self, CircleOperatorSpec};
use feynman_index::spectral::{self, RaySpec, DEFAULT_CLUSTER_TOL};
use num_complex::Complex64 as C64;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(feynman_index_py, FeynmanIndexError, PyException);

fn err(e: Error) -> PyErr {
    FeynmanIndexError::new_err(format!("{}: {e}", e.code()))
}

fn to_rows(m: &CMat) -> Vec<Vec<C64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

fn from_rows(rows: Vec<Vec<C64>>) -> PyResult<CMat> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(err(Error::InvalidInput("matrix must be square".into())));
    }
    Ok(CMat::from_fn(n, n, |i, j| rows[i][j]))
}

#[pyclass(name = "OperatorMatrix", frozen)]
struct PyOperatorMatrix {
    inner: spectral::OperatorMatrix,
}

#[pymethods]
impl PyOperatorMatrix {
    #[new]
    fn new(rows: Vec<Vec<C64>>) -> PyResult<Self> {
        Ok(Self { inner: spectral::OperatorMatrix::new(from_rows(rows)?).map_err(err)? })
    }

    /// `-i d/dtheta + flux` on modes `|k| <= k`.
    #[staticmethod]
    fn circle(flux: f64, k: usize) -> PyResult<Self> {
        Ok(Self { inner: models::build_circle_dirac(&CircleOperatorSpec::flux_only(flux, k)).map_err(err)? })
    }

    #[staticmethod]
    fn jordan(k: usize) -> PyResult<Self> {
        Ok(Self { inner: models::build_jordan_model(k).map_err(err)? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn entries(&self) -> Vec<Vec<C64>> {
        to_rows(self.inner.entries())
    }

    /// `(p_>, p_<, p_0)` as nested lists.
    fn frequency_projectors(&self) -> PyResult<(Vec<Vec<C64>>, Vec<Vec<C64>>, Vec<Vec<C64>>)> {
        let p = spectral::frequency_projectors(&self.inner, RaySpec::default(), DEFAULT_CLUSTER_TOL).map_err(err)?;
        Ok((to_rows(p.p_gt.entries()), to_rows(p.p_lt.entries()), to_rows(p.p_0.entries())))
    }

    fn power(&self, s: C64) -> PyResult<Self> {
        Ok(Self { inner: spectral::complex_power(&self.inner, s, RaySpec::default(), DEFAULT_CLUSTER_TOL).map_err(err)? })
    }

    /// Eta invariant by `method` in `zeta`, `heat` or `smeared`; `k` sets the
    /// fit window of the last two.
    #[pyo3(signature = (method = "zeta", k = None))]
    fn eta<'py>(&self, py: Python<'py>, method: &str, k: Option<usize>) -> PyResult<Bound<'py, PyDict>> {
        let ray = RaySpec::default();
        let k = k.unwrap_or_else(|| (self.inner.dim().saturating_sub(1) / 2).max(1));
        let r = match method {
            "zeta" => eta_zeta(&self.inner, ray),
            "heat" => eta_heat(&self.inner, ray, &default_grid(k)),
            "smeared" => eta_smeared(&self.inner, ray, &default_grid(k)),
            other => Err(Error::InvalidInput(format!("unknown method `{other}`"))),
        }
        .map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("eta", r.eta)?;
        d.set_item("h", r.h)?;
        d.set_item("xi", r.xi)?;
        d.set_item("error_estimate", r.error_estimate)?;
        Ok(d)
    }
}

#[pyclass(name = "CylinderModel", frozen)]
struct PyCylinderModel {
    inner: models::CylinderModel,
}

#[pymethods]
impl PyCylinderModel {
    /// Smoothstep gauge path `a_minus -> a_plus` on `[0, duration]`.
    #[new]
    #[pyo3(signature = (a_minus, a_plus, k, duration = 4.0))]
    fn new(a_minus: f64, a_plus: f64, k: usize, duration: f64) -> PyResult<Self> {
        let inner = models::CylinderModel::smoothstep(a_minus, a_plus, duration, k);
        inner.validate().map_err(err)?;
        Ok(Self { inner })
    }

    fn index_report<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let r = index::index_report(&self.inner, RaySpec::default()).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("trace_index", r.index.trace_index)?;
        d.set_item("rounded_index", r.index.rounded_index)?;
        d.set_item("spectral_flow", r.spectral_flow)?;
        d.set_item("xi_plus", r.xi.xi_plus)?;
        d.set_item("xi_minus", r.xi.xi_minus)?;
        d.set_item("curvature_integral", r.xi.curvature_integral)?;
        d.set_item("xi_rhs", r.xi.rhs)?;
        d.set_item("duality_residual", r.duality_residual)?;
        Ok(d)
    }

    fn spectral_flow(&self) -> PyResult<i64> {
        index::spectral_flow(&self.inner).map_err(err)
    }

    /// Local index density at `(t, theta)`: `(raw, calibrated)`.
    fn index_density(&self, t: f64, theta: f64) -> PyResult<(C64, f64)> {
        let v = hadamard::index_density(&self.inner, &[t, theta]).map_err(err)?;
        Ok((v.raw, v.density))
    }

    fn integrated_index_density(&self) -> PyResult<(C64, f64)> {
        hadamard::integrated_index_density(&self.inner).map_err(err)
    }
}

#[pyclass(name = "TestFunction", frozen)]
struct PyTestFunction {
    inner: distributions::TestFunction,
}

#[pymethods]
impl PyTestFunction {
    /// Polynomial times a Gaussian (or a compact bump) centred at `center`;
    /// `terms` is a list of `(exponents, coefficient)`, empty meaning `1`.
    #[new]
    #[pyo3(signature = (center, width, terms = Vec::new(), envelope = "gaussian"))]
    fn new(center: Vec<f64>, width: f64, terms: Vec<(Vec<u32>, f64)>, envelope: &str) -> PyResult<Self> {
        let inner = match envelope {
            "gaussian" => distributions::TestFunction::gaussian_poly(center, width, &terms),
            "bump" => distributions::TestFunction::bump(center, width, &terms),
            other => Err(Error::InvalidInput(format!("unknown envelope `{other}`"))),
        }
        .map_err(err)?;
        Ok(Self { inner })
    }

    fn __call__(&self, x: Vec<f64>) -> PyResult<f64> {
        if x.len() != self.inner.dim() {
            return Err(err(Error::InvalidInput("point has wrong dimension".into())));
        }
        Ok(self.inner.value(&x))
    }

    fn boosted(&self, rapidity: f64) -> PyResult<Self> {
        Ok(Self { inner: self.inner.boosted(rapidity).map_err(err)? })
    }
}

/// Pairs a Riesz-type family with a test function: `(value, error_estimate)`.
#[pyfunction]
#[pyo3(signature = (family, beta, sign, phi, lam = 1.0, strategy = "ladder"))]
fn pair(family: &str, beta: C64, sign: i8, phi: &PyTestFunction, lam: f64, strategy: &str) -> PyResult<(C64, f64)> {
    let fam = Family::parse(family).map_err(err)?;
    let s = match strategy {
        "ladder" => Strategy::default(),
        "boundary" => Strategy::BoundaryValue,
        other => return Err(err(Error::InvalidInput(format!("unknown strategy `{other}`")))),
    };
    let q = DistributionQuery::new(fam, beta, sign, phi.inner.dim()).with_lambda(lam).with_strategy(s);
    let r = distributions::pair(&q, &phi.inner).map_err(err)?;
    Ok((r.value, r.error_estimate))
}

/// `C(beta, n)` and its first `beta` derivative.
#[pyfunction]
fn structure_constant(beta: C64, n: usize) -> (C64, C64) {
    (distributions::coeff_c(beta, n), distributions::dcoeff_c(beta, n))
}

/// `V_k(x, x)` for `P = box + B` with constant `B` in two dimensions.
#[pyfunction]
#[pyo3(signature = (b, x, k_max = 3))]
fn hadamard_diagonal(b: Vec<Vec<C64>>, x: Vec<f64>, k_max: usize) -> PyResult<Vec<Vec<Vec<C64>>>> {
    let spec = FlatOperatorSpec::constant_potential(2, from_rows(b)?);
    let d = hadamard::diagonal_coefficients(&spec, &x, k_max).map_err(err)?;
    Ok(d.values.iter().map(to_rows).collect())
}

/// Runs a command on a JSON config and returns `(report_json, pass)`;
/// writes the report files when `out` is given.
#[pyfunction]
#[pyo3(signature = (command, config_json = "{}", seed = None, out = None))]
fn run(command: &str, config_json: &str, seed: Option<u64>, out: Option<std::path::PathBuf>) -> PyResult<(String, bool)> {
    let cmd = io::Command::parse(command).map_err(err)?;
    let cfg = io::ExperimentConfig::from_json(config_json).map_err(err)?;
    let report = io::run(cmd, &cfg, seed).map_err(err)?;
    if let Some(dir) = out {
        report.write(&dir).map_err(err)?;
    }
    Ok((report.to_json_string(), report.pass()))
}

#[pymodule]
fn feynman_index_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("FeynmanIndexError", m.py().get_type::<FeynmanIndexError>())?;
    m.add_class::<PyOperatorMatrix>()?;
    m.add_class::<PyCylinderModel>()?;
    m.add_class::<PyTestFunction>()?;
    m.add_function(wrap_pyfunction!(pair, m)?)?;
    m.add_function(wrap_pyfunction!(structure_constant, m)?)?;
    m.add_function(wrap_pyfunction!(hadamard_diagonal, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
