//! Python bindings. Argument errors raise `ValueError`; numerical failures
//! (non-convergence, overflow, quadrature) raise `ArithmeticError`.

use fracflight::flights::{ndim_solution, FlightKind, FlightLaw};
use fracflight::fracpoisson::FracPoissonLaw;
use fracflight::mcbride::{ek_monomial, op_monomial, HyperBesselOp};
use fracflight::pdecheck;
use fracflight::planar::{Mixing, PlanarLaw, ThinnedMotionSpec};
use fracflight::sampling::sample_parallel;
use fracflight::specfun;
use fracflight::telegraph::{self, Parity, TelegraphLaw};
use fracflight::Error;
use pyo3::exceptions::{PyArithmeticError, PyOverflowError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

const DEFAULT_SEED: u64 = 20240101;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Pole(_) | Error::InvalidParameter(_) | Error::Domain(_) | Error::Precondition { .. } => {
            PyValueError::new_err(e.to_string())
        }
        Error::Overflow(_) => PyOverflowError::new_err(e.to_string()),
        Error::NonConvergence { .. } | Error::Quadrature { .. } => PyArithmeticError::new_err(e.to_string()),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for fracflight::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

fn parity(s: &str) -> PyResult<Parity> {
    match s {
        "even" => Ok(Parity::Even),
        "odd" => Ok(Parity::Odd),
        _ => Err(PyValueError::new_err(format!("parity must be 'even' or 'odd', got {s:?}"))),
    }
}

fn operator(name: &str, param: Option<f64>) -> PyResult<HyperBesselOp> {
    let need = |what: &str| param.ok_or_else(|| PyValueError::new_err(format!("operator {name:?} needs {what}")));
    match name {
        "bessel-1d" => Ok(HyperBesselOp::bessel_1d()),
        "bessel-2d" => Ok(HyperBesselOp::bessel_2d()),
        "third-order" => Ok(HyperBesselOp::third_order()),
        "ndim" => Ok(HyperBesselOp::ndim(need("a dimension")? as u32)),
        "hyper" => HyperBesselOp::hyper(need("an order")? as u32).py(),
        "epd" => HyperBesselOp::epd(need("a multiplier")?).py(),
        _ => Err(PyValueError::new_err(format!("unknown operator {name:?}"))),
    }
}

#[pyfunction]
fn gamma(x: f64) -> PyResult<f64> {
    specfun::gamma(x).py()
}

/// `1/Γ(x)`, zero at the poles.
#[pyfunction]
fn rgamma(x: f64) -> f64 {
    specfun::rgamma(x)
}

#[pyfunction]
#[pyo3(signature = (alpha, beta, z))]
fn mittag_leffler(alpha: f64, beta: f64, z: f64) -> PyResult<f64> {
    specfun::mittag_leffler(alpha, beta, z).py()
}

#[pyfunction]
fn hyper_bessel(n: u32, x: f64) -> PyResult<f64> {
    specfun::hyper_bessel(n, x).py()
}

#[pyfunction]
fn bessel_i0(x: f64) -> PyResult<f64> {
    specfun::bessel_i0(x).py()
}

#[pyfunction]
fn bessel_i1(x: f64) -> PyResult<f64> {
    specfun::bessel_i1(x).py()
}

#[pyfunction]
fn bessel_j0(x: f64) -> PyResult<f64> {
    specfun::bessel_j0(x).py()
}

/// `"arcsine"`, `"uniform"` or `"bell"`.
#[pyfunction]
fn classify_shape(alpha: f64, k: u64, parity_name: &str) -> PyResult<String> {
    Ok(telegraph::classify_shape(alpha, k, parity(parity_name)?).py()?.to_string())
}

/// `(coefficient, exponent)` of the fractional power applied to `w^beta`.
#[pyfunction]
#[pyo3(signature = (op, alpha, beta, param=None))]
fn monomial(op: &str, alpha: f64, beta: f64, param: Option<f64>) -> PyResult<(f64, f64)> {
    let a = op_monomial(&operator(op, param)?, alpha, beta).py()?;
    Ok((a.coefficient, a.exponent))
}

#[pyfunction]
fn ek_coefficient(m: f64, eta: f64, alpha: f64, beta: f64) -> PyResult<f64> {
    ek_monomial(m, eta, alpha, beta).py()
}

/// Radial profile of the N-dimensional Klein-Gordon solution.
#[pyfunction]
fn kg_ndim_solution(dim: u32, alpha: f64, lambda: f64, c: f64, w: f64) -> PyResult<f64> {
    ndim_solution(dim, alpha, lambda, c, w).py()
}

/// Names accepted by [`verify`].
#[pyfunction]
fn verify_cases() -> Vec<&'static str> {
    pdecheck::CASES.to_vec()
}

/// Runs a symbolic check and returns its summary as a dict.
#[pyfunction]
#[pyo3(signature = (case, alpha, terms=pdecheck::DEFAULT_TERMS))]
fn verify<'py>(py: Python<'py>, case: &str, alpha: f64, terms: usize) -> PyResult<Bound<'py, PyDict>> {
    let r = pdecheck::run_case(case, alpha, terms).py()?;
    let d = PyDict::new(py);
    d.set_item("case", r.case)?;
    d.set_item("alpha", r.alpha)?;
    d.set_item("passed", r.passed)?;
    d.set_item("max_residual", r.max_residual)?;
    d.set_item("max_pointwise_residual", r.max_pointwise_residual)?;
    d.set_item("ledger_entries", r.report.ledger.len())?;
    Ok(d)
}

#[pyclass(name = "FracPoissonLaw", frozen)]
struct PyFracPoisson(FracPoissonLaw);

#[pymethods]
impl PyFracPoisson {
    #[new]
    fn new(alpha: f64, lambda: f64, t: f64) -> PyResult<Self> {
        FracPoissonLaw::new(alpha, lambda, t).py().map(Self)
    }

    fn pmf(&self, k: u64) -> f64 {
        self.0.pmf(k)
    }

    fn pgf(&self, u: f64) -> PyResult<f64> {
        self.0.pgf(u).py()
    }

    #[pyo3(signature = (n, seed=DEFAULT_SEED, workers=1))]
    fn sample(&self, n: usize, seed: u64, workers: usize) -> PyResult<Vec<u64>> {
        sample_parallel(n, seed, workers, |rng| self.0.sample(rng)).py()
    }

    fn __repr__(&self) -> String {
        format!("FracPoissonLaw(alpha={}, lambda={}, t={})", self.0.alpha(), self.0.lambda(), self.0.t())
    }
}

#[pyclass(name = "TelegraphLaw", frozen)]
struct PyTelegraph(TelegraphLaw);

#[pymethods]
impl PyTelegraph {
    #[new]
    fn new(alpha: f64, lambda: f64, c: f64, t: f64) -> PyResult<Self> {
        TelegraphLaw::new(alpha, lambda, c, t).py().map(Self)
    }

    /// `(absolutely continuous density, weight of each atom at ±ct)`.
    fn density(&self, x: f64) -> PyResult<(f64, f64)> {
        self.0.density(x).py()
    }

    fn conditional_density(&self, n: u64, x: f64) -> PyResult<f64> {
        self.0.conditional_density(n, x).py()
    }

    #[getter]
    fn singular_weight(&self) -> f64 {
        self.0.singular_weight()
    }

    fn ac_mass(&self) -> PyResult<f64> {
        self.0.ac_mass().py()
    }

    fn total_mass(&self) -> PyResult<f64> {
        self.0.total_mass().py()
    }

    #[pyo3(signature = (n, seed=DEFAULT_SEED, workers=1))]
    fn sample(&self, n: usize, seed: u64, workers: usize) -> PyResult<Vec<f64>> {
        sample_parallel(n, seed, workers, |rng| self.0.sample_position(rng)).py()
    }

    fn __repr__(&self) -> String {
        let l = &self.0;
        format!("TelegraphLaw(alpha={}, lambda={}, c={}, t={})", l.alpha(), l.lambda(), l.c(), l.t())
    }
}

#[pyclass(name = "PlanarLaw", frozen)]
struct PyPlanar(PlanarLaw);

#[pymethods]
impl PyPlanar {
    #[new]
    fn new(alpha: f64, lambda: f64, c: f64, t: f64) -> PyResult<Self> {
        PlanarLaw::new(alpha, lambda, c, t).py().map(Self)
    }

    /// `(interior density, mass on the circle of radius ct)`.
    fn density(&self, x: f64, y: f64) -> PyResult<(f64, f64)> {
        self.0.density_2d(x, y).py()
    }

    fn projection_density(&self, x: f64) -> PyResult<f64> {
        self.0.projection_density(x).py()
    }

    #[getter]
    fn boundary_mass(&self) -> f64 {
        self.0.boundary_mass()
    }

    fn interior_mass(&self) -> PyResult<f64> {
        self.0.interior_mass().py()
    }

    #[pyo3(signature = (n, seed=DEFAULT_SEED, workers=1))]
    fn sample(&self, n: usize, seed: u64, workers: usize) -> PyResult<Vec<(f64, f64)>> {
        sample_parallel(n, seed, workers, |rng| self.0.sample_2d(rng)).py()
    }

    fn __repr__(&self) -> String {
        let l = &self.0;
        format!("PlanarLaw(alpha={}, lambda={}, c={}, t={})", l.alpha(), l.lambda(), l.c(), l.t())
    }
}

#[pyclass(name = "ThinnedMotion", frozen)]
struct PyThinned(ThinnedMotionSpec);

#[pymethods]
impl PyThinned {
    /// `mixing` is `"fractional"` or `"homogeneous"`; it only matters for the
    /// unconditional methods.
    #[new]
    #[pyo3(signature = (n, alpha, c, t, mixing="fractional"))]
    fn new(n: u64, alpha: f64, c: f64, t: f64, mixing: &str) -> PyResult<Self> {
        let mixing = match mixing {
            "fractional" => Mixing::Fractional,
            "homogeneous" => Mixing::Homogeneous,
            _ => return Err(PyValueError::new_err(format!("unknown mixing {mixing:?}"))),
        };
        ThinnedMotionSpec::new(n, alpha, c, t, mixing).py().map(Self)
    }

    fn conditional_density(&self, x: f64, y: f64) -> PyResult<f64> {
        self.0.conditional_mean_density(x, y).py()
    }

    fn density(&self, lambda: f64, x: f64, y: f64) -> PyResult<f64> {
        self.0.unconditional_density(lambda, x, y).py()
    }

    fn boundary_mass(&self, lambda: f64) -> PyResult<f64> {
        self.0.boundary_mass(lambda).py()
    }
}

#[pyclass(name = "FlightLaw", frozen)]
struct PyFlight(FlightLaw);

#[pymethods]
impl PyFlight {
    /// Conditional laws in `R^dim`, `alpha` in (0, 1].
    #[staticmethod]
    fn ndim(dim: u32, alpha: f64, lambda: f64, c: f64, t: f64) -> PyResult<Self> {
        FlightLaw::ndim(dim, alpha, lambda, c, t).py().map(Self)
    }

    /// Four-dimensional flight, `alpha` in (1, 2].
    #[staticmethod]
    fn four_d(alpha: f64, lambda: f64, c: f64, t: f64) -> PyResult<Self> {
        FlightLaw::four_d(alpha, lambda, c, t).py().map(Self)
    }

    #[getter]
    fn dim(&self) -> u32 {
        self.0.dim()
    }

    fn conditional_density(&self, k: u64, x: Vec<f64>) -> PyResult<f64> {
        self.0.conditional_density(k, &x).py()
    }

    fn density(&self, x: Vec<f64>) -> PyResult<f64> {
        self.0.flight4d_density(&x).py()
    }

    fn boundary_mass(&self) -> PyResult<f64> {
        self.0.boundary_mass().py()
    }

    fn interior_mass(&self) -> PyResult<f64> {
        self.0.interior_mass().py()
    }

    /// Unconditional draws; four-dimensional flights only.
    #[pyo3(signature = (n, seed=DEFAULT_SEED, workers=1))]
    fn sample(&self, n: usize, seed: u64, workers: usize) -> PyResult<Vec<[f64; 4]>> {
        if self.0.kind() != FlightKind::FourD {
            return Err(PyValueError::new_err("sampling needs the four-dimensional flight"));
        }
        let draws = sample_parallel(n, seed, workers, |rng| self.0.sample_4d(rng)).py()?;
        draws.into_iter().collect::<fracflight::Result<Vec<_>>>().py()
    }

    fn __repr__(&self) -> String {
        let l = &self.0;
        format!("FlightLaw(dim={}, alpha={}, lambda={}, c={}, t={})", l.dim(), l.alpha(), l.lambda(), l.c(), l.t())
    }
}

#[pymodule(name = "fracflight")]
fn fracflight_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(gamma, m)?)?;
    m.add_function(wrap_pyfunction!(rgamma, m)?)?;
    m.add_function(wrap_pyfunction!(mittag_leffler, m)?)?;
    m.add_function(wrap_pyfunction!(hyper_bessel, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_i0, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_i1, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_j0, m)?)?;
    m.add_function(wrap_pyfunction!(classify_shape, m)?)?;
    m.add_function(wrap_pyfunction!(monomial, m)?)?;
    m.add_function(wrap_pyfunction!(ek_coefficient, m)?)?;
    m.add_function(wrap_pyfunction!(kg_ndim_solution, m)?)?;
    m.add_function(wrap_pyfunction!(verify_cases, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_class::<PyFracPoisson>()?;
    m.add_class::<PyTelegraph>()?;
    m.add_class::<PyPlanar>()?;
    m.add_class::<PyThinned>()?;
    m.add_class::<PyFlight>()?;
    Ok(())
}
