use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{dimension_check, Manifold, ManifoldDescriptor, PolarChart, Root};
use crate::error::{Error, Result};
use crate::special::{gamma, ln_gamma};

pub type CMatrix = DMatrix<Complex64>;

const PROJECTOR_TOL: f64 = 1e-10;
const TANGENT_TOL: f64 = 1e-10;
/// Principal angles within this of pi/2 put the pair in the cut locus.
const CUT_TOL: f64 = 1e-9;

/// A rank-k Hermitian projector on C^n, stored with an orthonormal basis of its image.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    matrix: CMatrix,
    basis: CMatrix,
}

impl Projector {
    /// Projector onto the column span of `frame` (n x k, full column rank).
    pub fn from_basis(frame: &CMatrix) -> Result<Self> {
        if frame.ncols() == 0 || frame.ncols() >= frame.nrows() {
            return Err(Error::InvalidPoint(format!(
                "frame of shape {}x{} does not span a proper subspace",
                frame.nrows(),
                frame.ncols()
            )));
        }
        let qr = frame.clone().qr();
        let r_diag_min = qr.r().diagonal().iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
        if !(r_diag_min > 1e-12) {
            return Err(Error::InvalidPoint("frame is rank deficient".into()));
        }
        Ok(Self::from_orthonormal(qr.q()))
    }

    fn from_orthonormal(q: CMatrix) -> Self {
        let m = &q * q.adjoint();
        let matrix = (&m + m.adjoint()).scale(0.5);
        Projector { matrix, basis: q }
    }

    /// Validate an explicit projector matrix of rank `k`.
    pub fn from_matrix(p: CMatrix, k: usize) -> Result<Self> {
        check_projector(&p, k)?;
        let basis = top_eigenvectors(&p, k);
        Ok(Projector { matrix: p, basis })
    }

    /// Nearest rank-k projector to a (nearly) Hermitian matrix: re-Hermitise,
    /// then keep the top-k eigenvectors.
    pub fn nearest(m: &CMatrix, k: usize) -> Result<Self> {
        if m.nrows() != m.ncols() || k == 0 || k >= m.nrows() {
            return Err(Error::invalid("nearest projector needs a square matrix and 0 < k < n"));
        }
        let h = (m + m.adjoint()).scale(0.5);
        Self::from_basis(&top_eigenvectors(&h, k))
    }

    /// Projector onto the span of the given standard basis vectors of C^n.
    pub fn coordinate(n: usize, indices: &[usize]) -> Result<Self> {
        let mut frame = CMatrix::zeros(n, indices.len());
        for (col, &i) in indices.iter().enumerate() {
            if i >= n {
                return Err(Error::invalid(format!("coordinate index {i} out of range for C^{n}")));
            }
            frame[(i, col)] = Complex64::new(1.0, 0.0);
        }
        Self::from_basis(&frame)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.matrix.nrows()
    }
}

fn check_projector(p: &CMatrix, k: usize) -> Result<()> {
    if p.nrows() != p.ncols() {
        return Err(Error::InvalidPoint("projector must be square".into()));
    }
    let herm = (p - p.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let idem = (p * p - p).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let tr = p.trace();
    let trace_err = (tr.re - k as f64).abs().max(tr.im.abs());
    if herm > PROJECTOR_TOL || idem > PROJECTOR_TOL || trace_err > PROJECTOR_TOL {
        return Err(Error::InvalidPoint(format!(
            "not a rank-{k} Hermitian projector (hermitian err {herm:.2e}, idempotency err {idem:.2e}, trace err {trace_err:.2e})"
        )));
    }
    Ok(())
}

/// Eigenvectors of a Hermitian matrix for its `k` largest eigenvalues, as columns.
pub(crate) fn top_eigenvectors(h: &CMatrix, k: usize) -> CMatrix {
    let eig = SymmetricEigen::new(h.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let cols: Vec<_> = order[..k].iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();
    CMatrix::from_columns(&cols)
}

/// Real eigenvalues of a Hermitian matrix in descending order.
pub(crate) fn hermitian_eigenvalues(h: &CMatrix) -> Vec<f64> {
    let eig = SymmetricEigen::new(h.clone());
    let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Principal-angle decomposition of a pair of subspaces.
struct PrincipalAngles {
    /// Singular vectors of `Y_x^* Y_y` on the `x` side (k x k).
    u: CMatrix,
    /// Unit directions in the orthogonal complement of `x` (n x k); zero columns where the angle vanishes.
    directions: CMatrix,
    angles: DVector<f64>,
}

/// The complex Grassmannian Gr(k, C^n) of k-dimensional subspaces, as rank-k
/// Hermitian projectors. The metric is `<D1, D2> = Re tr(D1 D2) / 2`, under
/// which geodesic distance is the l2 norm of the principal angles.
#[derive(Debug, Clone)]
pub struct Grassmann {
    n: usize,
    k: usize,
    descriptor: ManifoldDescriptor,
}

impl Grassmann {
    pub fn new(k: usize, n: usize) -> Result<Self> {
        if k == 0 || k >= n {
            return Err(Error::invalid(format!("Gr({k}, C^{n}) needs 0 < k < n")));
        }
        let rank = k.min(n - k);
        let dim = 2 * k * (n - k);
        let dimf = dim as f64;
        // Constants for the principal-angle metric:
        // - sectional curvature lies in [0, 4]; the maximum is attained on
        //   holomorphic planes (a totally geodesic CP^1 of radius 1/2);
        // - the cut locus is reached when a principal angle hits pi/2, so the
        //   injectivity radius is pi/2 and the convexity radius is pi/4;
        // - the diameter is attained with all `rank` angles equal to pi/2;
        // - volume is pi^{k(n-k)} prod_{j<k} j! prod_{j<n-k} j! / prod_{j<n} j!,
        //   which reduces to the Fubini-Study volume pi^{n-1}/(n-1)! for k = 1.
        //   The polar-chart volume identity in `temperature::structure` re-derives it.
        let ln_fact = |j: usize| ln_gamma(j as f64 + 1.0);
        let ln_vol = (k * (n - k)) as f64 * PI.ln() + (1..k).map(ln_fact).sum::<f64>()
            + (1..n - k).map(ln_fact).sum::<f64>()
            - (1..n).map(ln_fact).sum::<f64>();
        let descriptor = ManifoldDescriptor {
            name: format!("Gr({k},C^{n})"),
            dim,
            kappa_sq: 4.0,
            r_cx: PI / 4.0,
            diameter: (rank as f64).sqrt() * PI / 2.0,
            volume: ln_vol.exp(),
            omega_n: 2.0 * PI.powf(dimf / 2.0) / gamma(dimf / 2.0),
            injectivity_radius: PI / 2.0,
        };
        Ok(Grassmann { n, k, descriptor })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Rank of the symmetric space, min(k, n - k).
    pub fn rank(&self) -> usize {
        self.k.min(self.n - self.k)
    }

    /// Principal angles between the images of `x` and `y`, in descending order of cosine.
    pub fn principal_angles(&self, x: &Projector, y: &Projector) -> Vec<f64> {
        self.decompose(x, y).angles.iter().copied().collect()
    }

    fn decompose(&self, x: &Projector, y: &Projector) -> PrincipalAngles {
        let y1 = &x.basis;
        let y2 = &y.basis;
        let overlap = y1.adjoint() * y2;
        let svd = overlap.svd(true, true);
        let u = svd.u.expect("svd u");
        let v = svd.v_t.expect("svd v_t").adjoint();
        let sigma = svd.singular_values;
        // Y2 V = Y1 U diag(sigma) + W, with W orthogonal to Y1 and |W_i| = sin(theta_i).
        let y2v = y2 * &v;
        let mut y1us = y1 * &u;
        for (j, s) in sigma.iter().enumerate() {
            y1us.column_mut(j).scale_mut(*s);
        }
        let mut w = y2v - y1us;
        let mut angles = DVector::zeros(sigma.len());
        for j in 0..sigma.len() {
            let sn = w.column(j).norm();
            angles[j] = sn.atan2(sigma[j]);
            if sn > 1e-300 {
                w.column_mut(j).unscale_mut(sn);
            } else {
                w.column_mut(j).fill(Complex64::new(0.0, 0.0));
            }
        }
        PrincipalAngles { u, directions: w, angles }
    }

    fn tangent_from_frame(&self, x: &Projector, b: &CMatrix) -> CMatrix {
        let by = b * x.basis.adjoint();
        &by + by.adjoint()
    }

    /// Horizontal lift `B = (I - x) D Y` of a tangent vector (n x k).
    fn horizontal(&self, x: &Projector, v: &CMatrix) -> CMatrix {
        let vy = v * &x.basis;
        &vy - &x.matrix * &vy
    }

    fn log_unchecked(&self, x: &Projector, y: &Projector) -> CMatrix {
        let pa = self.decompose(x, y);
        let mut b = pa.directions.clone();
        for (j, th) in pa.angles.iter().enumerate() {
            b.column_mut(j).scale_mut(*th);
        }
        let b = b * pa.u.adjoint();
        self.tangent_from_frame(x, &b)
    }

    fn complement_basis(&self, x: &Projector) -> CMatrix {
        let id = CMatrix::identity(self.n, self.n);
        top_eigenvectors(&(id - &x.matrix), self.n - self.k)
    }

    fn square_check(&self, m: &CMatrix) -> Result<()> {
        dimension_check(self.n, m.nrows())?;
        dimension_check(self.n, m.ncols())
    }
}

impl Manifold for Grassmann {
    type Point = Projector;
    type Vector = CMatrix;
    type Isometry = CMatrix;

    fn descriptor(&self) -> &ManifoldDescriptor {
        &self.descriptor
    }

    fn check_point(&self, x: &Projector) -> Result<()> {
        self.square_check(&x.matrix)?;
        check_projector(&x.matrix, self.k)
    }

    fn check_tangent(&self, x: &Projector, v: &CMatrix) -> Result<()> {
        self.square_check(v)?;
        let herm = (v - v.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let id = CMatrix::identity(self.n, self.n);
        let q = &id - &x.matrix;
        let off = &x.matrix * v * &q + &q * v * &x.matrix;
        let block = (v - off).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm > TANGENT_TOL || block > TANGENT_TOL {
            return Err(Error::InvalidTangent(format!(
                "hermitian err {herm:.2e}, block-diagonal residue {block:.2e}"
            )));
        }
        Ok(())
    }

    fn distance(&self, x: &Projector, y: &Projector) -> f64 {
        self.decompose(x, y).angles.norm()
    }

    fn exp(&self, x: &Projector, v: &CMatrix) -> Projector {
        let b = self.horizontal(x, v);
        if b.iter().all(|z| z.norm() == 0.0) {
            return x.clone();
        }
        let svd = b.svd(true, true);
        let u = svd.u.expect("svd u");
        let vh = svd.v_t.expect("svd v_t");
        let vv = vh.adjoint();
        let sigma = svd.singular_values;
        let mut cos_part = &x.basis * &vv;
        let mut sin_part = u;
        for (j, s) in sigma.iter().enumerate() {
            cos_part.column_mut(j).scale_mut(s.cos());
            sin_part.column_mut(j).scale_mut(s.sin());
        }
        let frame = (cos_part + sin_part) * vh;
        Projector::from_basis(&frame).expect("geodesic frame keeps full rank")
    }

    fn log(&self, x: &Projector, y: &Projector) -> Result<CMatrix> {
        let pa = self.decompose(x, y);
        let max_angle = pa.angles.iter().copied().fold(0.0, f64::max);
        let margin = PI / 2.0 - max_angle;
        if margin < CUT_TOL {
            return Err(Error::CutLocus { margin });
        }
        let mut b = pa.directions;
        for (j, th) in pa.angles.iter().enumerate() {
            b.column_mut(j).scale_mut(*th);
        }
        let b = b * pa.u.adjoint();
        Ok(self.tangent_from_frame(x, &b))
    }

    fn interpolate(&self, x: &Projector, y: &Projector, t: f64) -> Projector {
        if t == 0.0 {
            return x.clone();
        }
        if t == 1.0 {
            return y.clone();
        }
        // At pi/2 angles the complement directions from the SVD still define a
        // minimising geodesic; the SVD makes the choice deterministic.
        let v = self.log_unchecked(x, y);
        self.exp(x, &v.scale(t))
    }

    fn symmetry(&self, center: &Projector, x: &Projector) -> Projector {
        // reflection through the image of `center`: r = 2c - I
        let id = CMatrix::identity(self.n, self.n);
        let r = center.matrix.scale(2.0) - id;
        Projector::from_basis(&(r * &x.basis)).expect("unitary image keeps full rank")
    }

    fn inner(&self, _x: &Projector, u: &CMatrix, v: &CMatrix) -> f64 {
        let mut acc = 0.0;
        for i in 0..u.nrows() {
            for j in 0..u.ncols() {
                acc += (u[(i, j)] * v[(j, i)]).re;
            }
        }
        0.5 * acc
    }

    fn zero_vector(&self, _x: &Projector) -> CMatrix {
        CMatrix::zeros(self.n, self.n)
    }

    fn scale(&self, v: &CMatrix, s: f64) -> CMatrix {
        v.scale(s)
    }

    fn axpy(&self, u: &CMatrix, s: f64, v: &CMatrix) -> CMatrix {
        u + v.scale(s)
    }

    fn tangent_basis(&self, x: &Projector) -> Vec<CMatrix> {
        let comp = self.complement_basis(x);
        let mut basis = Vec::with_capacity(self.descriptor.dim);
        for a in 0..self.n - self.k {
            for b in 0..self.k {
                for unit in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)] {
                    let mut frame = CMatrix::zeros(self.n, self.k);
                    for i in 0..self.n {
                        frame[(i, b)] = comp[(i, a)] * unit;
                    }
                    basis.push(self.tangent_from_frame(x, &frame));
                }
            }
        }
        basis
    }

    fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Projector {
        loop {
            let g = CMatrix::from_fn(self.n, self.k, |_, _| {
                Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            });
            if let Ok(p) = Projector::from_basis(&g) {
                return p;
            }
        }
    }

    fn identity_isometry(&self) -> CMatrix {
        CMatrix::identity(self.n, self.n)
    }

    fn check_isometry(&self, g: &CMatrix) -> Result<()> {
        self.square_check(g)?;
        let err = (g.adjoint() * g - CMatrix::identity(self.n, self.n))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if err > 1e-10 {
            return Err(Error::invalid(format!("matrix is not unitary (|g* g - I| = {err:.3e})")));
        }
        Ok(())
    }

    fn act(&self, g: &CMatrix, x: &Projector) -> Projector {
        Projector::from_basis(&(g * &x.basis)).expect("unitary image keeps full rank")
    }

    fn act_inverse(&self, g: &CMatrix, x: &Projector) -> Projector {
        Projector::from_basis(&(g.adjoint() * &x.basis)).expect("unitary image keeps full rank")
    }

    fn polar_chart(&self) -> PolarChart {
        // Restricted roots of SU(n)/S(U(k) x U(n-k)) with r = min(k, n-k), in
        // the normalisation where |a| is the principal-angle distance:
        // e_i +- e_j (mult 2), e_i (mult 2(n - 2r)), 2 e_i (mult 1).
        let r = self.rank();
        let unit = |i: usize, s: f64| {
            let mut c = vec![0.0; r];
            c[i] = s;
            c
        };
        let mut roots = Vec::new();
        for i in 0..r {
            for j in i + 1..r {
                let mut plus = unit(i, 1.0);
                plus[j] = 1.0;
                let mut minus = unit(i, 1.0);
                minus[j] = -1.0;
                roots.push(Root { coeffs: minus, multiplicity: 2 });
                roots.push(Root { coeffs: plus, multiplicity: 2 });
            }
            let short = 2 * (self.n - 2 * r);
            if short > 0 {
                roots.push(Root { coeffs: unit(i, 1.0), multiplicity: short });
            }
            roots.push(Root { coeffs: unit(i, 2.0), multiplicity: 1 });
        }
        PolarChart { rank: r, roots, side: PI / 2.0, ordered: true }
    }

    fn coords(&self, x: &Projector) -> Vec<f64> {
        let re = x.matrix.iter().map(|z| z.re);
        let im = x.matrix.iter().map(|z| z.im);
        // column-major storage; transpose to row-major labels
        let n = self.n;
        let mut out = Vec::with_capacity(2 * n * n);
        let re: Vec<f64> = re.collect();
        let im: Vec<f64> = im.collect();
        for part in [&re, &im] {
            for i in 0..n {
                for j in 0..n {
                    out.push(part[j * n + i]);
                }
            }
        }
        out
    }

    fn coord_labels(&self) -> Vec<String> {
        let mut labels = Vec::with_capacity(2 * self.n * self.n);
        for part in ["re", "im"] {
            for i in 0..self.n {
                for j in 0..self.n {
                    labels.push(format!("{part}_{i}_{j}"));
                }
            }
        }
        labels
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn descriptor_constants() {
        let g = Grassmann::new(1, 2).unwrap();
        let d = g.descriptor();
        assert_eq!(d.dim, 2);
        // CP^1 is a round sphere of radius 1/2
        assert_abs_diff_eq!(d.volume, PI, epsilon = 1e-12);
        assert_abs_diff_eq!(d.diameter, PI / 2.0, epsilon = 1e-15);
        let g = Grassmann::new(2, 4).unwrap();
        assert_eq!(g.descriptor().dim, 8);
        assert_abs_diff_eq!(g.descriptor().volume, PI.powi(4) / 12.0, epsilon = 1e-10);
        assert!(Grassmann::new(0, 3).is_err());
        assert!(Grassmann::new(3, 3).is_err());
    }

    #[test]
    fn orthogonal_lines_in_c2() {
        let g = Grassmann::new(1, 2).unwrap();
        let e1 = Projector::coordinate(2, &[0]).unwrap();
        let e2 = Projector::coordinate(2, &[1]).unwrap();
        // principal-angle oracle: singular value of the 1x1 overlap is 0, so theta = pi/2
        assert_abs_diff_eq!(g.distance(&e1, &e2), PI / 2.0, epsilon = 1e-15);
        assert!(matches!(g.log(&e1, &e2), Err(Error::CutLocus { .. })));
    }

    #[test]
    fn exp_rotates_line_onto_orthogonal_line() {
        let g = Grassmann::new(1, 2).unwrap();
        let e1 = Projector::coordinate(2, &[0]).unwrap();
        // B = e2 * (pi/2), D = B Y* + Y B*
        let mut v = CMatrix::zeros(2, 2);
        v[(1, 0)] = c(PI / 2.0);
        v[(0, 1)] = c(PI / 2.0);
        g.check_tangent(&e1, &v).unwrap();
        assert_abs_diff_eq!(g.norm(&e1, &v), PI / 2.0, epsilon = 1e-15);
        let y = g.exp(&e1, &v);
        // 2x2 unitary conjugation oracle: rotation by pi/2 maps e1 to e2
        let u = CMatrix::from_row_slice(2, 2, &[c(0.0), c(-1.0), c(1.0), c(0.0)]);
        let expect = &u * e1.matrix() * u.adjoint();
        let err = (y.matrix() - expect).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(err < 1e-15, "err = {err}");
    }

    #[test]
    fn projector_validation() {
        let bad = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.1), c(0.1), c(0.0)]);
        assert!(Projector::from_matrix(bad, 1).is_err());
        let p = Projector::coordinate(3, &[0, 2]).unwrap();
        Projector::from_matrix(p.matrix().clone(), 2).unwrap();
        assert!(Projector::from_matrix(p.matrix().clone(), 1).is_err());
    }

    #[test]
    fn nearest_projector_recovers_perturbed_point() {
        let g = Grassmann::new(2, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = g.random_point(&mut rng);
        let mut noisy = x.matrix().clone();
        noisy[(0, 1)] += c(1e-9);
        let y = Projector::nearest(&noisy, 2).unwrap();
        g.check_point(&y).unwrap();
        assert!(g.distance(&x, &y) < 1e-8);
    }

    #[test]
    fn tangent_basis_is_orthonormal() {
        let g = Grassmann::new(2, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = g.random_point(&mut rng);
        let b = g.tangent_basis(&x);
        assert_eq!(b.len(), 8);
        for (i, u) in b.iter().enumerate() {
            g.check_tangent(&x, u).unwrap();
            for (j, v) in b.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(g.inner(&x, u, v), expect, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn symmetry_reflects_through_center() {
        let g = Grassmann::new(1, 3).unwrap();
        let c0 = Projector::coordinate(3, &[0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = g.random_point(&mut rng);
        let s = g.symmetry(&c0, &x);
        // geodesic symmetry equals exp(c, -log(c, x))
        let v = g.log(&c0, &x).unwrap();
        let expect = g.exp(&c0, &v.scale(-1.0));
        assert!(g.distance(&s, &expect) < 1e-10);
        assert!(g.distance(&g.symmetry(&c0, &c0), &c0) < 1e-12);
    }

    #[test]
    fn coords_are_row_major() {
        let g = Grassmann::new(1, 2).unwrap();
        let e2 = Projector::coordinate(2, &[1]).unwrap();
        let c = g.coords(&e2);
        assert_eq!(c.len(), 8);
        assert!((c[3] - 1.0).abs() < 1e-14, "{c:?}");
        assert!(c.iter().enumerate().all(|(i, v)| i == 3 || v.abs() < 1e-14));
        assert_eq!(g.coord_labels()[3], "re_1_1");
    }
}
