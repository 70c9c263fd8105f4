//! Compact symmetric spaces: the interface the optimiser needs and two
//! concrete instances, the unit sphere `S^n` and the complex Grassmannian
//! `Gr(k, C^n)` embedded as Hermitian projectors.

mod curvature;
mod grassmann;
mod sphere;

pub use curvature::sectional_curvature_probe;
pub use grassmann::{CMatrix, Grassmann, Projector};
pub(crate) use grassmann::{hermitian_eigenvalues, top_eigenvectors};
pub use sphere::{Sphere, SpherePoint};

use std::fmt::Debug;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};

/// Geometry constants of a compact symmetric space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifoldDescriptor {
    pub name: String,
    /// Real dimension n.
    pub dim: usize,
    /// Upper bound on the sectional curvature.
    pub kappa_sq: f64,
    /// Convexity radius, (pi/2) / kappa.
    pub r_cx: f64,
    pub diameter: f64,
    pub volume: f64,
    /// Surface area of the unit sphere S^{n-1} in the tangent space.
    pub omega_n: f64,
    /// Injectivity radius (the spaces here are homogeneous, so it is the same at every point).
    pub injectivity_radius: f64,
}

impl ManifoldDescriptor {
    pub fn kappa(&self) -> f64 {
        self.kappa_sq.sqrt()
    }
}

/// A restricted root `a -> <coeffs, a>` with its multiplicity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Root {
    pub coeffs: Vec<f64>,
    pub multiplicity: usize,
}

impl Root {
    pub fn eval(&self, a: &[f64]) -> f64 {
        self.coeffs.iter().zip(a).map(|(c, x)| c * x).sum()
    }
}

/// Flat polar-coordinate chart `(s, a) -> point`, with `a` ranging over the
/// cell `D+` of a maximal flat. The volume density is proportional to
/// `prod |sin root(a)|^multiplicity`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolarChart {
    pub rank: usize,
    pub roots: Vec<Root>,
    /// `D+` is `{ side > a_1 > a_2 > ... > a_rank > 0 }` when `ordered`, otherwise the box `(0, side)^rank`.
    pub side: f64,
    pub ordered: bool,
}

impl PolarChart {
    /// Euclidean volume of the cell D+.
    pub fn cell_volume(&self) -> f64 {
        let cube = self.side.powi(self.rank as i32);
        if self.ordered {
            cube / factorial(self.rank)
        } else {
            cube
        }
    }

    /// Jacobian of the chart up to the constant carried by the measure on the orbit S.
    pub fn jacobian(&self, a: &[f64]) -> f64 {
        self.roots
            .iter()
            .map(|r| r.eval(a).sin().abs().powi(r.multiplicity as i32))
            .product()
    }

    /// Small-radius limit of the Jacobian, `prod root(a)^multiplicity`.
    pub fn flat_jacobian(&self, a: &[f64]) -> f64 {
        self.roots
            .iter()
            .map(|r| r.eval(a).abs().powi(r.multiplicity as i32))
            .product()
    }
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Riemannian geometry of a compact symmetric space in embedding coordinates.
///
/// Tangent vectors are represented in ambient coordinates; every method that
/// takes one also takes its base point.
pub trait Manifold: Send + Sync {
    type Point: Clone + Debug + Send + Sync;
    type Vector: Clone + Debug + Send + Sync;
    /// Stored isometry acting on points (rotation, unitary conjugation).
    type Isometry: Clone + Debug + Send + Sync;

    fn descriptor(&self) -> &ManifoldDescriptor;

    fn dim(&self) -> usize {
        self.descriptor().dim
    }

    /// Validate the point invariants (unit norm, projector, ...).
    fn check_point(&self, x: &Self::Point) -> Result<()>;

    /// Validate that `v` lies in the tangent space at `x`.
    fn check_tangent(&self, x: &Self::Point, v: &Self::Vector) -> Result<()>;

    fn distance(&self, x: &Self::Point, y: &Self::Point) -> f64;

    /// Distance with dimension and invariant checks on both arguments.
    fn checked_distance(&self, x: &Self::Point, y: &Self::Point) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        Ok(self.distance(x, y))
    }

    fn exp(&self, x: &Self::Point, v: &Self::Vector) -> Self::Point;

    /// Inverse of `exp`; fails with [`Error::CutLocus`] when `y` is in the cut locus of `x`.
    fn log(&self, x: &Self::Point, y: &Self::Point) -> Result<Self::Vector>;

    /// Point at fraction `t` along a length-minimising geodesic from `x` to `y`.
    /// Cut-locus pairs are resolved by a deterministic choice of geodesic.
    fn interpolate(&self, x: &Self::Point, y: &Self::Point, t: f64) -> Self::Point;

    /// Geodesic symmetry about `center`.
    fn symmetry(&self, center: &Self::Point, x: &Self::Point) -> Self::Point;

    fn inner(&self, x: &Self::Point, u: &Self::Vector, v: &Self::Vector) -> f64;

    fn norm(&self, x: &Self::Point, v: &Self::Vector) -> f64 {
        self.inner(x, v, v).max(0.0).sqrt()
    }

    fn zero_vector(&self, x: &Self::Point) -> Self::Vector;

    fn scale(&self, v: &Self::Vector, s: f64) -> Self::Vector;

    /// `u + s * v`
    fn axpy(&self, u: &Self::Vector, s: f64, v: &Self::Vector) -> Self::Vector;

    /// Orthonormal basis of the tangent space at `x`.
    fn tangent_basis(&self, x: &Self::Point) -> Vec<Self::Vector>;

    /// Draw from the normalised Riemannian volume.
    fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Point;

    /// Uniformly distributed unit tangent vector at `x`.
    fn random_unit_tangent<R: Rng + ?Sized>(&self, x: &Self::Point, rng: &mut R) -> Self::Vector {
        let basis = self.tangent_basis(x);
        loop {
            let mut v = self.zero_vector(x);
            for e in &basis {
                let c: f64 = rng.sample(StandardNormal);
                v = self.axpy(&v, c, e);
            }
            let n = self.norm(x, &v);
            if n > 1e-12 {
                return self.scale(&v, 1.0 / n);
            }
        }
    }

    fn identity_isometry(&self) -> Self::Isometry;
    fn check_isometry(&self, g: &Self::Isometry) -> Result<()>;
    fn act(&self, g: &Self::Isometry, x: &Self::Point) -> Self::Point;
    fn act_inverse(&self, g: &Self::Isometry, x: &Self::Point) -> Self::Point;

    /// Flat polar chart used for the structural constant of the space.
    fn polar_chart(&self) -> PolarChart;

    /// Real embedding coordinates, for CSV output.
    fn coords(&self, x: &Self::Point) -> Vec<f64>;
    fn coord_labels(&self) -> Vec<String>;

    /// `Hess (1/2) d^2(., z)` at `x`, evaluated on `(u, u)`, where a closed form is available.
    fn distance_hessian_form(&self, _x: &Self::Point, _z: &Self::Point, _u: &Self::Vector) -> Result<f64> {
        Err(Error::Unsupported(format!("closed-form distance Hessian on {}", self.descriptor().name)))
    }
}

pub(crate) fn dimension_check(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
