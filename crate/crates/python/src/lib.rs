//! Python bindings: manifolds, the shipped objectives, the optimiser and the
//! temperature report.

use baryopt::barycentre::batch_frechet_mean;
use baryopt::experiment::{optimize, OptimizeConfig};
use baryopt::manifold::{CMatrix, Grassmann, Manifold, Projector, Sphere, SpherePoint};
use baryopt::objective::{objective_legendre_sphere, GrassmannTrace, Objective};
use baryopt::profile::{estimate_minimizer_profile_with, estimate_u_delta, ProfileOptions};
use baryopt::rng::stream_rng;
use baryopt::sampler::{UnitaryConjugation, VonMisesFisher};
use baryopt::temperature::{abs_gaussian_moment, beta_half, ct_convexity, temperature_report, unit_sphere_area};
use nalgebra::{Complex, DVector};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(baryopt_py, BaryoptError, PyValueError);

fn py_err(e: baryopt::Error) -> PyErr {
    BaryoptError::new_err(e.to_string())
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for baryopt::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

/// Parse a JSON rendering of a serialisable value into a Python object.
fn to_python<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| BaryoptError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// The unit sphere `S^n` in `R^{n+1}`; points and tangent vectors are lists of floats.
#[pyclass(name = "Sphere", frozen)]
struct PySphere {
    inner: Sphere,
}

impl PySphere {
    fn point(&self, x: &[f64]) -> PyResult<SpherePoint> {
        self.inner.point(x).py()
    }

    fn vector(&self, x: &SpherePoint, v: &[f64]) -> PyResult<DVector<f64>> {
        let v = DVector::from_column_slice(v);
        self.inner.check_tangent(x, &v).py()?;
        Ok(v)
    }
}

#[pymethods]
impl PySphere {
    #[new]
    fn new(n: usize) -> PyResult<Self> {
        Ok(PySphere { inner: Sphere::new(n).py()? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    /// Geometry constants as a dict.
    fn descriptor<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_python(py, self.inner.descriptor())
    }

    fn distance(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
        Ok(self.inner.distance(&self.point(&x)?, &self.point(&y)?))
    }

    fn exp(&self, x: Vec<f64>, v: Vec<f64>) -> PyResult<Vec<f64>> {
        let x = self.point(&x)?;
        let v = self.vector(&x, &v)?;
        Ok(self.inner.coords(&self.inner.exp(&x, &v)))
    }

    fn log(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<Vec<f64>> {
        let v = self.inner.log(&self.point(&x)?, &self.point(&y)?).py()?;
        Ok(v.iter().copied().collect())
    }

    fn interpolate(&self, x: Vec<f64>, y: Vec<f64>, t: f64) -> PyResult<Vec<f64>> {
        Ok(self.inner.coords(&self.inner.interpolate(&self.point(&x)?, &self.point(&y)?, t)))
    }

    fn symmetry(&self, center: Vec<f64>, x: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self.inner.coords(&self.inner.symmetry(&self.point(&center)?, &self.point(&x)?)))
    }

    fn random_point(&self, seed: u64) -> Vec<f64> {
        self.inner.coords(&self.inner.random_point(&mut stream_rng(seed, 0)))
    }

    #[pyo3(signature = (points, tol = 1e-10, max_iter = 500))]
    fn frechet_mean(&self, points: Vec<Vec<f64>>, tol: f64, max_iter: usize) -> PyResult<Vec<f64>> {
        let pts = points.iter().map(|p| self.point(p)).collect::<PyResult<Vec<_>>>()?;
        Ok(self.inner.coords(&batch_frechet_mean(&self.inner, &pts, tol, max_iter).py()?))
    }
}

/// `Gr(k, C^n)`; points are given as n x k orthonormal frames of complex numbers.
#[pyclass(name = "Grassmann", frozen)]
struct PyGrassmann {
    inner: Grassmann,
}

impl PyGrassmann {
    fn point(&self, frame: &[Vec<Complex<f64>>]) -> PyResult<Projector> {
        let (n, k) = (self.inner.n(), self.inner.k());
        if frame.len() != n || frame.iter().any(|r| r.len() != k) {
            return Err(BaryoptError::new_err(format!("expected an {n} x {k} frame")));
        }
        let p = Projector::from_basis(&CMatrix::from_fn(n, k, |i, j| frame[i][j])).py()?;
        self.inner.check_point(&p).py()?;
        Ok(p)
    }

    fn frame(p: &Projector) -> Vec<Vec<Complex<f64>>> {
        let b = p.basis();
        (0..b.nrows()).map(|i| (0..b.ncols()).map(|j| b[(i, j)]).collect()).collect()
    }
}

#[pymethods]
impl PyGrassmann {
    #[new]
    fn new(k: usize, n: usize) -> PyResult<Self> {
        Ok(PyGrassmann { inner: Grassmann::new(k, n).py()? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn descriptor<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_python(py, self.inner.descriptor())
    }

    fn distance(&self, x: Vec<Vec<Complex<f64>>>, y: Vec<Vec<Complex<f64>>>) -> PyResult<f64> {
        Ok(self.inner.distance(&self.point(&x)?, &self.point(&y)?))
    }

    fn principal_angles(&self, x: Vec<Vec<Complex<f64>>>, y: Vec<Vec<Complex<f64>>>) -> PyResult<Vec<f64>> {
        Ok(self.inner.principal_angles(&self.point(&x)?, &self.point(&y)?))
    }

    fn random_point(&self, seed: u64) -> Vec<Vec<Complex<f64>>> {
        Self::frame(&self.inner.random_point(&mut stream_rng(seed, 0)))
    }
}

/// `-P_9(x_3)` at a point of the 2-sphere.
#[pyfunction]
fn legendre_objective(x: Vec<f64>) -> PyResult<f64> {
    let u = objective_legendre_sphere();
    Ok(u.eval(&u.manifold().point(&x).py()?))
}

/// Run the optimiser on the Legendre objective; returns a dict with the final
/// estimate and, optionally, the height `x_3` of the initial point and of the
/// estimate after every step.
#[pyfunction]
#[pyo3(signature = (temperature = 0.2, steps = 5000, seed = 0, concentration = 20.0, initial = None, burn_in = None, trajectory = false))]
#[allow(clippy::too_many_arguments)]
fn optimize_legendre<'py>(
    py: Python<'py>,
    temperature: f64,
    steps: u64,
    seed: u64,
    concentration: f64,
    initial: Option<Vec<f64>>,
    burn_in: Option<u64>,
    trajectory: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let u = objective_legendre_sphere();
    let s = u.manifold();
    let x0 = s.point(&initial.unwrap_or_else(|| vec![0.0, 0.0, -1.0])).py()?;
    let kernel = VonMisesFisher::new(concentration).py()?;
    let cfg = OptimizeConfig { temperature, steps, burn_in: burn_in.unwrap_or(steps / 10), seed };
    let mut heights = Vec::new();
    let o = py
        .detach(|| {
            optimize(x0, &u, &kernel, &cfg, |_, x| {
                if trajectory {
                    heights.push(x.coords()[2]);
                }
            })
        })
        .py()?;
    let d = PyDict::new(py);
    d.set_item("x_hat", s.coords(&o.x_hat))?;
    d.set_item("value", o.value)?;
    d.set_item("distance_to_minimizer", o.distance_to_minimizer)?;
    d.set_item("acceptance_rate", o.acceptance_rate)?;
    d.set_item("samples_used", o.samples_used)?;
    if trajectory {
        d.set_item("x3", heights)?;
    }
    Ok(d)
}

/// Run the optimiser on `-Re tr(C x)` over `Gr(k, C^n)` with diagonal `C`.
#[pyfunction]
#[pyo3(signature = (diagonal, k, temperature, steps, seed = 0, step_scale = 0.2, burn_in = None))]
#[allow(clippy::too_many_arguments)]
fn optimize_grassmann_trace<'py>(
    py: Python<'py>,
    diagonal: Vec<f64>,
    k: usize,
    temperature: f64,
    steps: u64,
    seed: u64,
    step_scale: f64,
    burn_in: Option<u64>,
) -> PyResult<Bound<'py, PyDict>> {
    let u = GrassmannTrace::diagonal(&diagonal, k).py()?;
    let g = u.manifold().clone();
    let x0 = g.random_point(&mut stream_rng(seed, 1));
    let kernel = UnitaryConjugation::new(step_scale).py()?;
    let cfg = OptimizeConfig { temperature, steps, burn_in: burn_in.unwrap_or(steps / 10), seed };
    let o = py.detach(|| optimize(x0, &u, &kernel, &cfg, |_, _| {})).py()?;
    let d = PyDict::new(py);
    d.set_item("x_hat", PyGrassmann::frame(&o.x_hat))?;
    d.set_item("value", o.value)?;
    d.set_item("distance_to_minimizer", o.distance_to_minimizer)?;
    d.set_item("acceptance_rate", o.acceptance_rate)?;
    Ok(d)
}

/// Minimiser profile and temperature thresholds for the Legendre objective.
#[pyfunction]
#[pyo3(signature = (delta = None, epsilon = None, search_samples = 1_000_000))]
fn temperature_report_legendre<'py>(
    py: Python<'py>,
    delta: Option<f64>,
    epsilon: Option<f64>,
    search_samples: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let u = objective_legendre_sphere();
    let s = u.manifold();
    let x_star = u.known_minimizer().expect("pole");
    let delta = delta.unwrap_or(0.3 * s.descriptor().r_cx);
    let opts = ProfileOptions { search_samples, ..ProfileOptions::default() };
    let report = py
        .detach(|| {
            let p = estimate_minimizer_profile_with(&u, &x_star, &opts)?;
            let u_delta = estimate_u_delta(&u, &x_star, delta, &opts)?;
            temperature_report(&p, s.descriptor(), &s.polar_chart(), delta, u_delta, epsilon)
        })
        .py()?;
    to_python(py, &report)
}

/// `E|X|^k` for a standard normal `X`.
#[pyfunction(name = "abs_gaussian_moment")]
fn py_abs_gaussian_moment(k: f64) -> f64 {
    abs_gaussian_moment(k)
}

/// `B(1/2, n/2)`.
#[pyfunction(name = "beta_half")]
fn py_beta_half(n: usize) -> f64 {
    beta_half(n)
}

/// Surface area of the unit sphere in `R^n`.
#[pyfunction(name = "unit_sphere_area")]
fn py_unit_sphere_area(n: usize) -> f64 {
    unit_sphere_area(n)
}

/// The convexity factor at radius `delta` for curvature bound `kappa^2`.
#[pyfunction(name = "ct_convexity")]
fn py_ct_convexity(delta: f64, kappa: f64) -> PyResult<f64> {
    ct_convexity(delta, kappa).py()
}

#[pymodule]
fn baryopt_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("BaryoptError", m.py().get_type::<BaryoptError>())?;
    m.add_class::<PySphere>()?;
    m.add_class::<PyGrassmann>()?;
    m.add_function(wrap_pyfunction!(legendre_objective, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_legendre, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_grassmann_trace, m)?)?;
    m.add_function(wrap_pyfunction!(temperature_report_legendre, m)?)?;
    m.add_function(wrap_pyfunction!(py_abs_gaussian_moment, m)?)?;
    m.add_function(wrap_pyfunction!(py_beta_half, m)?)?;
    m.add_function(wrap_pyfunction!(py_unit_sphere_area, m)?)?;
    m.add_function(wrap_pyfunction!(py_ct_convexity, m)?)?;
    Ok(())
}
