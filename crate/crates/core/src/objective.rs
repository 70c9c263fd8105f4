//! Objective functions `U: M -> R` and the shipped instances.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::manifold::{hermitian_eigenvalues, top_eigenvectors, CMatrix};
use crate::manifold::{Grassmann, Manifold, Projector, Sphere, SpherePoint};
use crate::special::legendre_with_derivative;

/// A deterministic, finite objective on a manifold.
pub trait Objective<M: Manifold>: Send + Sync {
    fn manifold(&self) -> &M;

    fn eval(&self, x: &M::Point) -> f64;

    /// The global minimiser, when it is known in closed form.
    fn known_minimizer(&self) -> Option<M::Point> {
        None
    }
}

impl<M: Manifold, O: Objective<M> + ?Sized> Objective<M> for Box<O> {
    fn manifold(&self) -> &M {
        (**self).manifold()
    }
    fn eval(&self, x: &M::Point) -> f64 {
        (**self).eval(x)
    }
    fn known_minimizer(&self) -> Option<M::Point> {
        (**self).known_minimizer()
    }
}

impl<M: Manifold, O: Objective<M> + ?Sized> Objective<M> for &O {
    fn manifold(&self) -> &M {
        (**self).manifold()
    }
    fn eval(&self, x: &M::Point) -> f64 {
        (**self).eval(x)
    }
    fn known_minimizer(&self) -> Option<M::Point> {
        (**self).known_minimizer()
    }
}

/// `U(x) = -P_degree(x_last)` on the sphere; for S^2 this is `-P_9(x^3)`.
///
/// It depends only on the last coordinate, so it is invariant under every
/// rotation fixing the pole `(0, ..., 0, 1)`, in particular under the
/// geodesic symmetry about it.
#[derive(Debug, Clone)]
pub struct LegendreObjective {
    sphere: Sphere,
    degree: usize,
}

impl LegendreObjective {
    pub fn new(sphere: Sphere, degree: usize) -> Result<Self> {
        if degree == 0 {
            return Err(Error::invalid("Legendre degree 0 is constant and has no unique minimiser"));
        }
        Ok(LegendreObjective { sphere, degree })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Value as a function of the last coordinate `t`.
    pub fn profile(&self, t: f64) -> f64 {
        -legendre_with_derivative(self.degree, t.clamp(-1.0, 1.0)).0
    }
}

/// The S^2 objective `-P_9(x^3)` with minimiser `(0, 0, 1)`.
pub fn objective_legendre_sphere() -> LegendreObjective {
    LegendreObjective::new(Sphere::new(2).expect("S^2"), 9).expect("degree 9")
}

impl Objective<Sphere> for LegendreObjective {
    fn manifold(&self) -> &Sphere {
        &self.sphere
    }

    fn eval(&self, x: &SpherePoint) -> f64 {
        let c = x.coords();
        self.profile(c[c.len() - 1])
    }

    fn known_minimizer(&self) -> Option<SpherePoint> {
        // P_n(1) = 1 is the strict maximum of P_n on [-1, 1]
        let d = self.sphere.ambient_dim();
        let mut v = vec![0.0; d];
        v[d - 1] = 1.0;
        Some(SpherePoint::from_slice(&v).expect("unit pole"))
    }
}

/// `U(x) = -Re tr(C x)` on Gr(k, C^n) for a Hermitian positive-definite `C`
/// with distinct eigenvalues. The minimiser is the projector onto the span
/// of the top-k eigenvectors of `C`.
#[derive(Debug, Clone)]
pub struct GrassmannTrace {
    grassmann: Grassmann,
    c: CMatrix,
    minimizer: Projector,
}

impl GrassmannTrace {
    pub fn new(c: CMatrix, k: usize) -> Result<Self> {
        let n = c.nrows();
        if c.ncols() != n {
            return Err(Error::invalid("C must be square"));
        }
        let herm = (&c - c.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm > 1e-10 {
            return Err(Error::invalid(format!("C is not Hermitian (|C - C*| = {herm:.3e})")));
        }
        let grassmann = Grassmann::new(k, n)?;
        let eig = hermitian_eigenvalues(&c);
        if eig[n - 1] <= 0.0 {
            return Err(Error::invalid("C must be positive definite"));
        }
        let min_gap = eig.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min);
        if min_gap <= 1e-8 {
            return Err(Error::invalid(format!(
                "C has repeated eigenvalues (gap {min_gap:.3e}); the minimiser is not unique"
            )));
        }
        let minimizer = Projector::from_basis(&top_eigenvectors(&c, k))?;
        Ok(GrassmannTrace { grassmann, c, minimizer })
    }

    /// Real diagonal `C`.
    pub fn diagonal(diag: &[f64], k: usize) -> Result<Self> {
        let n = diag.len();
        let c = CMatrix::from_fn(n, n, |i, j| if i == j { Complex64::new(diag[i], 0.0) } else { Complex64::new(0.0, 0.0) });
        Self::new(c, k)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.c
    }

    /// Minimum value, minus the sum of the top-k eigenvalues of `C`.
    pub fn min_value(&self) -> f64 {
        -hermitian_eigenvalues(&self.c)[..self.grassmann.k()].iter().sum::<f64>()
    }
}

impl Objective<Grassmann> for GrassmannTrace {
    fn manifold(&self) -> &Grassmann {
        &self.grassmann
    }

    fn eval(&self, x: &Projector) -> f64 {
        let p = x.matrix();
        let mut acc = 0.0;
        for i in 0..p.nrows() {
            for j in 0..p.ncols() {
                acc += (self.c[(i, j)] * p[(j, i)]).re;
            }
        }
        -acc
    }

    fn known_minimizer(&self) -> Option<Projector> {
        Some(self.minimizer.clone())
    }
}

/// A template objective moved by an isometry: `U(x) = U_o(g^{-1} x)`, with
/// minimiser `g o`.
#[derive(Debug, Clone)]
pub struct Transported<M: Manifold, O> {
    base: O,
    g: M::Isometry,
}

impl<M: Manifold, O: Objective<M>> Transported<M, O> {
    pub fn new(base: O, g: M::Isometry) -> Result<Self> {
        base.manifold().check_isometry(&g)?;
        Ok(Transported { base, g })
    }

    pub fn base(&self) -> &O {
        &self.base
    }

    pub fn isometry(&self) -> &M::Isometry {
        &self.g
    }
}

/// Build `U(x) = base(g^{-1} x)`; fails if `g` is not orthogonal / unitary.
pub fn objective_transported<M: Manifold, O: Objective<M>>(base: O, g: M::Isometry) -> Result<Transported<M, O>> {
    Transported::new(base, g)
}

impl<M: Manifold, O: Objective<M>> Objective<M> for Transported<M, O> {
    fn manifold(&self) -> &M {
        self.base.manifold()
    }

    fn eval(&self, x: &M::Point) -> f64 {
        let m = self.base.manifold();
        self.base.eval(&m.act_inverse(&self.g, x))
    }

    fn known_minimizer(&self) -> Option<M::Point> {
        let m = self.base.manifold();
        self.base.known_minimizer().map(|o| m.act(&self.g, &o))
    }
}

/// `U(x) = scale * d^2(x, center)`.
#[derive(Debug, Clone)]
pub struct SquaredDistance<M: Manifold> {
    manifold: M,
    center: M::Point,
    scale: f64,
}

impl<M: Manifold> SquaredDistance<M> {
    pub fn new(manifold: M, center: M::Point, scale: f64) -> Result<Self> {
        manifold.check_point(&center)?;
        if !(scale > 0.0) {
            return Err(Error::invalid("scale must be positive"));
        }
        Ok(SquaredDistance { manifold, center, scale })
    }
}

impl<M: Manifold> Objective<M> for SquaredDistance<M> {
    fn manifold(&self) -> &M {
        &self.manifold
    }

    fn eval(&self, x: &M::Point) -> f64 {
        let d = self.manifold.distance(x, &self.center);
        self.scale * d * d
    }

    fn known_minimizer(&self) -> Option<M::Point> {
        Some(self.center.clone())
    }
}

/// Constant objective; the Gibbs distribution is then the uniform law.
#[derive(Debug, Clone)]
pub struct Constant<M> {
    manifold: M,
    value: f64,
}

impl<M: Manifold> Constant<M> {
    pub fn new(manifold: M, value: f64) -> Self {
        Constant { manifold, value }
    }
}

impl<M: Manifold> Objective<M> for Constant<M> {
    fn manifold(&self) -> &M {
        &self.manifold
    }
    fn eval(&self, _x: &M::Point) -> f64 {
        self.value
    }
}

/// Rotation of R^d by `angle` in the (i, j) coordinate plane, sending e_j toward e_i.
pub fn plane_rotation(d: usize, i: usize, j: usize, angle: f64) -> DMatrix<f64> {
    let mut r = DMatrix::identity(d, d);
    let (s, c) = angle.sin_cos();
    r[(i, i)] = c;
    r[(j, j)] = c;
    r[(i, j)] = s;
    r[(j, i)] = -s;
    r
}
