use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::{dimension_check, Manifold, ManifoldDescriptor, PolarChart, Root};
use crate::error::{Error, Result};
use crate::special::gamma;

const NORM_TOL: f64 = 1e-12;
const TANGENT_TOL: f64 = 1e-10;
/// Pairs closer than this to antipodal have no unique logarithm.
pub(crate) const ANTIPODAL_TOL: f64 = 1e-9;

/// A unit vector in R^{n+1}.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint(DVector<f64>);

impl SpherePoint {
    /// Wrap a vector that is already of unit norm (within 1e-12).
    pub fn new(coords: DVector<f64>) -> Result<Self> {
        let n = coords.norm();
        if !n.is_finite() || (n - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidPoint(format!("sphere point has norm {n}")));
        }
        Ok(SpherePoint(coords))
    }

    /// Normalise an arbitrary nonzero vector onto the sphere.
    pub fn normalized(coords: DVector<f64>) -> Result<Self> {
        let n = coords.norm();
        if !n.is_finite() || n < 1e-300 {
            return Err(Error::InvalidPoint("cannot normalise a zero vector".into()));
        }
        Ok(SpherePoint(coords / n))
    }

    pub fn from_slice(coords: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(coords))
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DVector<f64> {
        self.0
    }

    pub(crate) fn renormalize(v: DVector<f64>) -> Self {
        let n = v.norm();
        if (n - 1.0).abs() <= 4.0 * f64::EPSILON {
            return SpherePoint(v);
        }
        SpherePoint(v / n)
    }
}

/// The unit sphere S^n embedded in R^{n+1}, with curvature 1.
#[derive(Debug, Clone)]
pub struct Sphere {
    n: usize,
    descriptor: ManifoldDescriptor,
}

impl Sphere {
    pub fn new(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::invalid("sphere dimension must be at least 1"));
        }
        let nf = n as f64;
        let descriptor = ManifoldDescriptor {
            name: format!("S^{n}"),
            dim: n,
            kappa_sq: 1.0,
            r_cx: PI / 2.0,
            diameter: PI,
            volume: 2.0 * PI.powf((nf + 1.0) / 2.0) / gamma((nf + 1.0) / 2.0),
            omega_n: 2.0 * PI.powf(nf / 2.0) / gamma(nf / 2.0),
            injectivity_radius: PI,
        };
        Ok(Sphere { n, descriptor })
    }

    pub fn ambient_dim(&self) -> usize {
        self.n + 1
    }

    /// Point from coordinates, normalising them.
    pub fn point(&self, coords: &[f64]) -> Result<SpherePoint> {
        dimension_check(self.ambient_dim(), coords.len())?;
        SpherePoint::normalized(DVector::from_column_slice(coords))
    }

    /// Orthogonal projection of an ambient vector onto the tangent space at x.
    pub fn project(&self, x: &SpherePoint, v: &DVector<f64>) -> DVector<f64> {
        v - x.coords() * x.coords().dot(v)
    }

    /// Unit tangent at x used to break ties at the cut locus: the first
    /// coordinate axis not (nearly) parallel to x, projected to the tangent space.
    fn tie_break_direction(&self, x: &SpherePoint) -> DVector<f64> {
        for i in 0..self.ambient_dim() {
            let e = DVector::from_fn(self.ambient_dim(), |j, _| if j == i { 1.0 } else { 0.0 });
            let p = self.project(x, &e);
            let n = p.norm();
            if n > 1e-6 {
                return p / n;
            }
        }
        unreachable!("some coordinate axis is not parallel to x")
    }

    /// Logarithm without the cut-locus check; antipodes get the tie-break direction.
    fn log_unchecked(&self, x: &SpherePoint, y: &SpherePoint) -> DVector<f64> {
        let theta = self.distance(x, y);
        let w = y.coords() - x.coords() * x.coords().dot(y.coords());
        let wn = w.norm();
        if wn < 1e-300 || theta == 0.0 {
            if theta > PI / 2.0 {
                return self.tie_break_direction(x) * theta;
            }
            return DVector::zeros(self.ambient_dim());
        }
        if PI - theta < ANTIPODAL_TOL {
            return self.tie_break_direction(x) * theta;
        }
        w * (theta / wn)
    }
}

impl Manifold for Sphere {
    type Point = SpherePoint;
    type Vector = DVector<f64>;
    type Isometry = DMatrix<f64>;

    fn descriptor(&self) -> &ManifoldDescriptor {
        &self.descriptor
    }

    fn check_point(&self, x: &SpherePoint) -> Result<()> {
        dimension_check(self.ambient_dim(), x.0.len())?;
        let n = x.0.norm();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidPoint(format!("sphere point has norm {n}")));
        }
        Ok(())
    }

    fn check_tangent(&self, x: &SpherePoint, v: &DVector<f64>) -> Result<()> {
        dimension_check(self.ambient_dim(), v.len())?;
        let ip = x.0.dot(v);
        if ip.abs() > TANGENT_TOL {
            return Err(Error::InvalidTangent(format!("<v, x> = {ip:.3e}")));
        }
        Ok(())
    }

    fn distance(&self, x: &SpherePoint, y: &SpherePoint) -> f64 {
        // 2 atan2(|x - y|, |x + y|) is accurate at both ends of [0, pi],
        // where arccos of the clamped inner product loses digits.
        let diff = (&x.0 - &y.0).norm();
        let sum = (&x.0 + &y.0).norm();
        2.0 * diff.atan2(sum)
    }

    fn exp(&self, x: &SpherePoint, v: &DVector<f64>) -> SpherePoint {
        let nv = v.norm();
        if nv == 0.0 {
            return x.clone();
        }
        SpherePoint::renormalize(&x.0 * nv.cos() + v * (nv.sin() / nv))
    }

    fn log(&self, x: &SpherePoint, y: &SpherePoint) -> Result<DVector<f64>> {
        let theta = self.distance(x, y);
        let margin = PI - theta;
        if margin < ANTIPODAL_TOL {
            return Err(Error::CutLocus { margin });
        }
        Ok(self.log_unchecked(x, y))
    }

    fn interpolate(&self, x: &SpherePoint, y: &SpherePoint, t: f64) -> SpherePoint {
        if t == 0.0 {
            return x.clone();
        }
        if t == 1.0 {
            return y.clone();
        }
        let v = self.log_unchecked(x, y);
        self.exp(x, &(v * t))
    }

    fn symmetry(&self, center: &SpherePoint, x: &SpherePoint) -> SpherePoint {
        let c = &center.0;
        SpherePoint::renormalize(c * (2.0 * c.dot(&x.0)) - &x.0)
    }

    fn inner(&self, _x: &SpherePoint, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        u.dot(v)
    }

    fn zero_vector(&self, _x: &SpherePoint) -> DVector<f64> {
        DVector::zeros(self.ambient_dim())
    }

    fn scale(&self, v: &DVector<f64>, s: f64) -> DVector<f64> {
        v * s
    }

    fn axpy(&self, u: &DVector<f64>, s: f64, v: &DVector<f64>) -> DVector<f64> {
        u + v * s
    }

    fn tangent_basis(&self, x: &SpherePoint) -> Vec<DVector<f64>> {
        // Gram-Schmidt on the coordinate axes after x.
        let d = self.ambient_dim();
        let mut basis: Vec<DVector<f64>> = Vec::with_capacity(self.n);
        let mut frame = vec![x.0.clone()];
        for i in 0..d {
            if basis.len() == self.n {
                break;
            }
            let mut e = DVector::from_fn(d, |j, _| if j == i { 1.0 } else { 0.0 });
            for _ in 0..2 {
                for f in &frame {
                    e -= f * f.dot(&e);
                }
            }
            let n = e.norm();
            if n > 1e-8 {
                let e = e / n;
                frame.push(e.clone());
                basis.push(e);
            }
        }
        basis
    }

    fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> SpherePoint {
        loop {
            let v = DVector::from_fn(self.ambient_dim(), |_, _| rng.sample::<f64, _>(StandardNormal));
            let n = v.norm();
            if n > 1e-12 {
                return SpherePoint(v / n);
            }
        }
    }

    fn random_unit_tangent<R: Rng + ?Sized>(&self, x: &SpherePoint, rng: &mut R) -> DVector<f64> {
        loop {
            let g = DVector::from_fn(self.ambient_dim(), |_, _| rng.sample::<f64, _>(StandardNormal));
            let v = self.project(x, &g);
            let n = v.norm();
            if n > 1e-12 {
                return v / n;
            }
        }
    }

    fn identity_isometry(&self) -> DMatrix<f64> {
        DMatrix::identity(self.ambient_dim(), self.ambient_dim())
    }

    fn check_isometry(&self, g: &DMatrix<f64>) -> Result<()> {
        let d = self.ambient_dim();
        if g.nrows() != d || g.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: g.nrows() });
        }
        let err = (g.transpose() * g - DMatrix::<f64>::identity(d, d)).amax();
        if err > 1e-10 {
            return Err(Error::invalid(format!("matrix is not orthogonal (|g^T g - I| = {err:.3e})")));
        }
        Ok(())
    }

    fn act(&self, g: &DMatrix<f64>, x: &SpherePoint) -> SpherePoint {
        SpherePoint::renormalize(g * &x.0)
    }

    fn act_inverse(&self, g: &DMatrix<f64>, x: &SpherePoint) -> SpherePoint {
        SpherePoint::renormalize(g.tr_mul(&x.0))
    }

    fn polar_chart(&self) -> PolarChart {
        // Rank one: a single root with multiplicity n - 1 and flat cell (0, pi).
        PolarChart {
            rank: 1,
            roots: vec![Root { coeffs: vec![1.0], multiplicity: self.n - 1 }],
            side: PI,
            ordered: false,
        }
    }

    fn coords(&self, x: &SpherePoint) -> Vec<f64> {
        x.0.iter().copied().collect()
    }

    fn coord_labels(&self) -> Vec<String> {
        (1..=self.ambient_dim()).map(|i| format!("x{i}")).collect()
    }

    fn distance_hessian_form(&self, x: &SpherePoint, z: &SpherePoint, u: &DVector<f64>) -> Result<f64> {
        let uu = u.norm_squared();
        let r = self.distance(x, z);
        if r < 1e-12 {
            return Ok(uu);
        }
        let v = self.log(x, z)?;
        let c = u.dot(&v) / r;
        // radial eigenvalue 1, transverse eigenvalue r cot r
        Ok(c * c + r / r.tan() * (uu - c * c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn s2() -> Sphere {
        Sphere::new(2).unwrap()
    }

    fn p(c: &[f64]) -> SpherePoint {
        s2().point(c).unwrap()
    }

    #[test]
    fn descriptor_for_s2() {
        let d = s2().descriptor().clone();
        assert_eq!(d.dim, 2);
        assert_eq!(d.kappa_sq, 1.0);
        assert_eq!(d.diameter, PI);
        assert_abs_diff_eq!(d.volume, 4.0 * PI, epsilon = 1e-13);
        assert_abs_diff_eq!(d.omega_n, 2.0 * PI, epsilon = 1e-13);
        assert_eq!(d.r_cx, PI / 2.0);
    }

    #[test]
    fn orthogonal_points_are_quarter_circle_apart() {
        let m = s2();
        assert_abs_diff_eq!(m.distance(&p(&[1.0, 0.0, 0.0]), &p(&[0.0, 0.0, 1.0])), PI / 2.0, epsilon = 1e-15);
        let x = p(&[0.3, -0.4, 0.5]);
        assert_eq!(m.distance(&x, &x), 0.0);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let m = s2();
        let bad = SpherePoint::new(DVector::from_column_slice(&[1.0, 0.0])).unwrap();
        let good = p(&[1.0, 0.0, 0.0]);
        assert!(matches!(m.checked_distance(&bad, &good), Err(Error::DimensionMismatch { .. })));
        assert!(m.point(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn exp_zero_and_antipode() {
        let m = s2();
        let n = p(&[0.0, 0.0, 1.0]);
        assert_eq!(m.exp(&n, &DVector::zeros(3)), n);
        let v = DVector::from_column_slice(&[PI, 0.0, 0.0]);
        let s = m.exp(&n, &v);
        assert_abs_diff_eq!(s.coords()[2], -1.0, epsilon = 1e-15);
        assert!(s.coords()[0].abs() < 1e-15);
    }

    #[test]
    fn log_quarter_circle() {
        let m = s2();
        let v = m.log(&p(&[1.0, 0.0, 0.0]), &p(&[0.0, 1.0, 0.0])).unwrap();
        assert_abs_diff_eq!(v[1], PI / 2.0, epsilon = 1e-15);
        assert!(v[0].abs() < 1e-15 && v[2].abs() < 1e-15);
        let x = p(&[0.2, 0.3, 0.9]);
        assert_eq!(m.log(&x, &x).unwrap().norm(), 0.0);
    }

    #[test]
    fn log_rejects_antipodes() {
        let m = s2();
        let r = m.log(&p(&[0.0, 0.0, 1.0]), &p(&[0.0, 0.0, -1.0]));
        assert!(matches!(r, Err(Error::CutLocus { .. })));
    }

    #[test]
    fn interpolation_endpoints_and_midpoint() {
        let m = s2();
        let x = p(&[1.0, 0.0, 0.0]);
        let z = p(&[0.0, 1.0, 0.0]);
        assert_eq!(m.interpolate(&x, &z, 0.0), x);
        assert_eq!(m.interpolate(&x, &z, 1.0), z);
        let mid = m.interpolate(&x, &z, 0.5);
        let h = 0.5f64.sqrt();
        assert_abs_diff_eq!(mid.coords()[0], h, epsilon = 1e-15);
        assert_abs_diff_eq!(mid.coords()[1], h, epsilon = 1e-15);
    }

    #[test]
    fn antipodal_interpolation_uses_first_axis() {
        let m = s2();
        let n = p(&[0.0, 0.0, 1.0]);
        let s = p(&[0.0, 0.0, -1.0]);
        let mid = m.interpolate(&n, &s, 0.5);
        assert_abs_diff_eq!(mid.coords()[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.distance(&n, &mid), PI / 2.0, epsilon = 1e-14);
    }

    #[test]
    fn symmetry_fixes_center_and_reverses_equator() {
        let m = s2();
        let c = p(&[0.0, 0.0, 1.0]);
        assert_eq!(m.symmetry(&c, &c), c);
        let r = m.symmetry(&c, &p(&[1.0, 0.0, 0.0]));
        assert_abs_diff_eq!(r.coords()[0], -1.0, epsilon = 1e-15);
    }

    #[test]
    fn tangent_basis_is_orthonormal_and_tangent() {
        let m = Sphere::new(4).unwrap();
        let x = m.point(&[0.1, 0.2, -0.3, 0.4, 0.5]).unwrap();
        let b = m.tangent_basis(&x);
        assert_eq!(b.len(), 4);
        for (i, u) in b.iter().enumerate() {
            m.check_tangent(&x, u).unwrap();
            for (j, v) in b.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(u.dot(v), expect, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn non_orthogonal_isometry_rejected() {
        let m = s2();
        let mut g = m.identity_isometry();
        g[(0, 1)] = 0.1;
        assert!(m.check_isometry(&g).is_err());
        m.check_isometry(&m.identity_isometry()).unwrap();
    }
}
