//! Streaming and batch barycentres, and Monte-Carlo estimators of the
//! variance functional `E_T(x) = (1/2) E d^2(x, z)` and its derivatives.

use std::io::Write;

use log::warn;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::manifold::Manifold;
use crate::stats::{jackknife_mean, FunctionalEstimate};

/// Running barycentre `x_n = x_{n-1} #_{1/n} z_n`.
#[derive(Debug, Clone)]
pub struct BarycentreTracker<M: Manifold> {
    manifold: M,
    x_hat: Option<M::Point>,
    count: u64,
}

impl<M: Manifold + Clone> BarycentreTracker<M> {
    pub fn new(manifold: &M) -> Self {
        BarycentreTracker { manifold: manifold.clone(), x_hat: None, count: 0 }
    }

    /// Tracker reporting `x0` until the first sample arrives.
    pub fn with_initial(manifold: &M, x0: M::Point) -> Self {
        BarycentreTracker { manifold: manifold.clone(), x_hat: Some(x0), count: 0 }
    }
}

impl<M: Manifold> BarycentreTracker<M> {
    pub fn update(&mut self, z: &M::Point) -> &M::Point {
        self.count += 1;
        let next = match (&self.x_hat, self.count) {
            (Some(x), n) if n > 1 => self.manifold.interpolate(x, z, 1.0 / n as f64),
            _ => z.clone(),
        };
        self.x_hat.insert(next)
    }

    pub fn estimate(&self) -> Option<&M::Point> {
        self.x_hat.as_ref()
    }

    pub fn count(&self) -> u64 {
        self.count
    }
}

const CHUNK: usize = 8192;

/// `log(x, z)`, falling back to the tie-break geodesic when `z` is in the cut locus of `x`.
fn log_or_tie_break<M: Manifold>(m: &M, x: &M::Point, z: &M::Point) -> (M::Vector, bool) {
    match m.log(x, z) {
        Ok(v) => (v, false),
        Err(_) => {
            let mid = m.interpolate(x, z, 0.5);
            let v = m.log(x, &mid).expect("midpoint is within the injectivity radius");
            (m.scale(&v, 2.0), true)
        }
    }
}

/// Riemannian gradient descent `x <- exp(x, (step/N) sum log(x, z_i))`.
pub fn batch_frechet_mean<M: Manifold>(m: &M, samples: &[M::Point], tol: f64, max_iter: usize) -> Result<M::Point> {
    batch_frechet_mean_from(m, samples, None, tol, max_iter)
}

pub fn batch_frechet_mean_from<M: Manifold>(
    m: &M,
    samples: &[M::Point],
    start: Option<&M::Point>,
    tol: f64,
    max_iter: usize,
) -> Result<M::Point> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let step = 1.0;
    let n = samples.len() as f64;
    let mut x = start.unwrap_or(&samples[0]).clone();
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        let parts: Vec<(M::Vector, usize)> = samples
            .par_chunks(CHUNK)
            .map(|chunk| {
                let mut acc = m.zero_vector(&x);
                let mut cut = 0;
                for z in chunk {
                    let (v, hit) = log_or_tie_break(m, &x, z);
                    cut += usize::from(hit);
                    acc = m.axpy(&acc, 1.0, &v);
                }
                (acc, cut)
            })
            .collect();
        let mut grad = m.zero_vector(&x);
        let mut cut = 0;
        for (v, c) in &parts {
            grad = m.axpy(&grad, 1.0 / n, v);
            cut += c;
        }
        if cut > 0 {
            warn!("{cut} samples in the cut locus of the current iterate; using the tie-break geodesic");
        }
        residual = m.norm(&x, &grad);
        if residual < tol {
            return Ok(x);
        }
        x = m.exp(&x, &m.scale(&grad, step));
    }
    Err(Error::NoConvergence { iterations: max_iter, residual })
}

/// `(1/2N) sum d^2(x, z_i)`.
pub fn estimate_e_t<M: Manifold>(m: &M, x: &M::Point, samples: &[M::Point]) -> Result<FunctionalEstimate> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let v: Vec<f64> = samples
        .par_iter()
        .map(|z| {
            let d = m.distance(x, z);
            0.5 * d * d
        })
        .collect();
    Ok(jackknife_mean(&v))
}

#[derive(Debug, Clone)]
pub struct GradientEstimate<V> {
    pub vector: V,
    /// Coordinates in the orthonormal tangent basis at `x`.
    pub components: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub norm: f64,
    /// `sqrt(sum std_errors^2)`, the typical norm of pure noise.
    pub norm_std_error: f64,
    pub n_used: usize,
    pub dropped: usize,
}

/// `-(1/N) sum log(x, z_i)`; samples in the cut locus of `x` are dropped.
pub fn estimate_gradient<M: Manifold>(m: &M, x: &M::Point, samples: &[M::Point]) -> Result<GradientEstimate<M::Vector>> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let basis = m.tangent_basis(x);
    let rows: Vec<Option<Vec<f64>>> = samples
        .par_iter()
        .map(|z| m.log(x, z).ok().map(|v| basis.iter().map(|e| -m.inner(x, &v, e)).collect()))
        .collect();
    let kept: Vec<&Vec<f64>> = rows.iter().flatten().collect();
    let dropped = samples.len() - kept.len();
    if dropped as f64 > 1e-3 * samples.len() as f64 {
        warn!("{dropped} of {} samples dropped as cut-locus hits", samples.len());
    }
    if kept.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut components = Vec::with_capacity(basis.len());
    let mut std_errors = Vec::with_capacity(basis.len());
    let mut col = vec![0.0; kept.len()];
    for k in 0..basis.len() {
        for (c, row) in col.iter_mut().zip(&kept) {
            *c = row[k];
        }
        let est = jackknife_mean(&col);
        components.push(est.value);
        std_errors.push(est.std_error);
    }
    let mut vector = m.zero_vector(x);
    for (c, e) in components.iter().zip(&basis) {
        vector = m.axpy(&vector, *c, e);
    }
    Ok(GradientEstimate {
        norm: components.iter().map(|c| c * c).sum::<f64>().sqrt(),
        norm_std_error: std_errors.iter().map(|s| s * s).sum::<f64>().sqrt(),
        vector,
        components,
        std_errors,
        n_used: kept.len(),
        dropped,
    })
}

/// `(1/N) sum Hess (1/2) d^2(., z_i)(u, u)` from the manifold's closed form.
pub fn estimate_hessian_form<M: Manifold>(m: &M, x: &M::Point, u: &M::Vector, samples: &[M::Point]) -> Result<FunctionalEstimate> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let norm = m.norm(x, u);
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidTangent(format!("direction must be a unit vector, |u| = {norm}")));
    }
    let rows: Vec<Result<f64>> = samples.par_iter().map(|z| m.distance_hessian_form(x, z, u)).collect();
    let mut v = Vec::with_capacity(rows.len());
    for r in rows {
        match r {
            Ok(h) => v.push(h),
            Err(Error::CutLocus { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    if v.is_empty() {
        return Err(Error::EmptySamples);
    }
    Ok(jackknife_mean(&v))
}

/// Second central difference of the empirical `E_T` along `u`, with common samples.
pub fn hessian_form_fd<M: Manifold>(m: &M, x: &M::Point, u: &M::Vector, samples: &[M::Point], h: f64) -> Result<FunctionalEstimate> {
    if !(h > 0.0) {
        return Err(Error::invalid("finite-difference step must be positive"));
    }
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let plus = m.exp(x, &m.scale(u, h));
    let minus = m.exp(x, &m.scale(u, -h));
    let v: Vec<f64> = samples
        .par_iter()
        .map(|z| {
            let e = |p: &M::Point| {
                let d = m.distance(p, z);
                0.5 * d * d
            };
            (e(&plus) - 2.0 * e(x) + e(&minus)) / (h * h)
        })
        .collect();
    Ok(jackknife_mean(&v))
}

/// `(1/N) sum d(x*, z_i)`: the transport distance from the samples' law to the point mass at `x*`.
pub fn wasserstein_to_dirac<M: Manifold>(m: &M, x_star: &M::Point, samples: &[M::Point]) -> Result<FunctionalEstimate> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let v: Vec<f64> = samples.par_iter().map(|z| m.distance(x_star, z)).collect();
    Ok(jackknife_mean(&v))
}

/// One trajectory row.
#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryRow {
    pub n: u64,
    pub coords: Vec<f64>,
    pub distance_to_minimizer: Option<f64>,
    pub u: f64,
}

/// CSV with columns `n, <coords>, dist_to_min, u`.
pub struct TrajectoryCsvWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> TrajectoryCsvWriter<W> {
    pub fn new(out: W, coord_labels: &[String]) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(out);
        let mut header = vec!["n".to_string()];
        header.extend(coord_labels.iter().cloned());
        header.push("dist_to_min".into());
        header.push("u".into());
        inner.write_record(&header)?;
        Ok(TrajectoryCsvWriter { inner })
    }

    pub fn write(&mut self, row: &TrajectoryRow) -> Result<()> {
        let mut rec = Vec::with_capacity(row.coords.len() + 3);
        rec.push(row.n.to_string());
        rec.extend(row.coords.iter().map(|c| c.to_string()));
        rec.push(row.distance_to_minimizer.map(|d| d.to_string()).unwrap_or_default());
        rec.push(row.u.to_string());
        self.inner.write_record(&rec)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.inner.flush()?;
        self.inner.into_inner().map_err(|e| Error::Io(e.into_error()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{Sphere, SpherePoint};
    use crate::objective::{objective_legendre_sphere, Objective};
    use crate::rng::stream_rng;
    use crate::sampler::{sample_chain, ChainConfig, ProposalKernel, VonMisesFisher};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn cloud(kappa: f64, n: usize, seed: u64) -> (Sphere, SpherePoint, Vec<SpherePoint>) {
        let s = Sphere::new(2).unwrap();
        let c = s.point(&[0.0, 0.0, 1.0]).unwrap();
        let k = VonMisesFisher::new(kappa).unwrap();
        let mut rng = stream_rng(seed, 0);
        let pts = (0..n).map(|_| k.propose(&s, &c, &mut rng)).collect();
        (s, c, pts)
    }

    #[test]
    fn tracker_first_updates() {
        let s = Sphere::new(2).unwrap();
        let z = s.point(&[0.3, 0.4, 0.5]).unwrap();
        let mut t = BarycentreTracker::with_initial(&s, s.point(&[0.0, 0.0, -1.0]).unwrap());
        assert_eq!(t.update(&z), &z);
        let x2 = t.update(&z).clone();
        assert!(s.distance(&x2, &z) < 1e-12);
        assert_eq!(t.count(), 2);
    }

    #[test]
    fn batch_mean_simple_cases() {
        let s = Sphere::new(2).unwrap();
        let a = s.point(&[1.0, 0.0, 0.0]).unwrap();
        let b = s.point(&[0.0, 1.0, 0.0]).unwrap();
        let one = batch_frechet_mean(&s, std::slice::from_ref(&a), 1e-10, 500).unwrap();
        assert!(s.distance(&one, &a) < 1e-12);
        let mid = batch_frechet_mean(&s, &[a.clone(), b.clone()], 1e-10, 500).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(s.distance(&mid, &s.point(&[h, h, 0.0]).unwrap()) < 1e-9);
        assert!(matches!(batch_frechet_mean(&s, &[], 1e-10, 5), Err(Error::EmptySamples)));
    }

    #[test]
    fn batch_mean_minimises_empirical_functional() {
        let (s, c, pts) = cloud(50.0, 100, 1);
        let mean = batch_frechet_mean(&s, &pts, 1e-10, 500).unwrap();
        assert!(s.distance(&mean, &c) < 0.05);
        let e_mean = estimate_e_t(&s, &mean, &pts).unwrap().value;
        for p in &pts {
            assert!(e_mean <= estimate_e_t(&s, p, &pts).unwrap().value);
        }
    }

    #[test]
    fn streaming_agrees_with_batch_on_concentrated_cloud() {
        let (s, _, pts) = cloud(50.0, 10_000, 2);
        let mut t = BarycentreTracker::new(&s);
        for p in &pts {
            t.update(p);
        }
        let batch = batch_frechet_mean(&s, &pts, 1e-10, 500).unwrap();
        assert!(s.distance(t.estimate().unwrap(), &batch) < 1e-2);
        let g = estimate_gradient(&s, &batch, &pts).unwrap();
        assert!(g.norm < 3.0 * g.norm_std_error);
    }

    #[test]
    fn e_t_trivial_values() {
        let s = Sphere::new(2).unwrap();
        let x = s.point(&[0.0, 0.0, 1.0]).unwrap();
        let y = s.point(&[0.0, 0.0, -1.0]).unwrap();
        assert_eq!(estimate_e_t(&s, &x, &vec![x.clone(); 10]).unwrap().value, 0.0);
        assert_relative_eq!(estimate_e_t(&s, &x, &vec![y; 10]).unwrap().value, PI * PI / 2.0, max_relative = 1e-14);
        assert_eq!(wasserstein_to_dirac(&s, &x, &vec![x.clone(); 3]).unwrap().value, 0.0);
    }

    #[test]
    fn symmetric_pairs_cancel() {
        let (s, c, pts) = cloud(5.0, 500, 3);
        let mut paired = pts.clone();
        paired.extend(pts.iter().map(|p| s.symmetry(&c, p)));
        let g = estimate_gradient(&s, &c, &paired).unwrap();
        assert!(g.norm < 1e-12, "{}", g.norm);
    }

    #[test]
    fn gradient_points_toward_cloud() {
        let (s, _, pts) = cloud(20.0, 2000, 4);
        let x = s.point(&[1.0, 0.0, 1.0]).unwrap();
        let g = estimate_gradient(&s, &x, &pts).unwrap();
        let mean = batch_frechet_mean(&s, &pts, 1e-10, 500).unwrap();
        let toward = s.log(&x, &mean).unwrap();
        // E_T decreases toward the cloud, so the gradient opposes that direction
        assert!(s.inner(&x, &g.vector, &toward) < 0.0);
    }

    #[test]
    fn gradient_matches_finite_difference_of_e_t() {
        let (s, _, pts) = cloud(3.0, 5000, 5);
        let x = s.point(&[0.2, -0.1, 1.0]).unwrap();
        let g = estimate_gradient(&s, &x, &pts).unwrap();
        let mut rng = stream_rng(6, 0);
        for _ in 0..5 {
            let u = s.random_unit_tangent(&x, &mut rng);
            let h = 1e-5;
            let ep = estimate_e_t(&s, &s.exp(&x, &s.scale(&u, h)), &pts).unwrap().value;
            let em = estimate_e_t(&s, &s.exp(&x, &s.scale(&u, -h)), &pts).unwrap().value;
            let fd = (ep - em) / (2.0 * h);
            let an = s.inner(&x, &g.vector, &u);
            assert!((fd - an).abs() < 1e-2 * an.abs().max(1e-2), "{fd} vs {an}");
        }
    }

    #[test]
    fn hessian_closed_form_special_cases() {
        let s = Sphere::new(2).unwrap();
        let x = s.point(&[0.0, 0.0, 1.0]).unwrap();
        let mut rng = stream_rng(7, 0);
        for _ in 0..10 {
            let u = s.random_unit_tangent(&x, &mut rng);
            assert_relative_eq!(estimate_hessian_form(&s, &x, &u, std::slice::from_ref(&x)).unwrap().value, 1.0, max_relative = 1e-12);
        }
        let z = s.point(&[1.0, 0.0, 1.0]).unwrap();
        let radial = s.log(&x, &z).unwrap().normalize();
        assert_relative_eq!(estimate_hessian_form(&s, &x, &radial, &[z]).unwrap().value, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn hessian_closed_form_matches_finite_difference() {
        let u = objective_legendre_sphere();
        let s = u.manifold().clone();
        let (pts, _) = sample_chain(
            s.point(&[0.0, 0.0, 1.0]).unwrap(),
            &u,
            0.5,
            &VonMisesFisher::new(5.0).unwrap(),
            &ChainConfig::new(60_000, 8),
        )
        .unwrap();
        let x = s.point(&[0.1, 0.05, 1.0]).unwrap();
        let mut rng = stream_rng(9, 0);
        for _ in 0..5 {
            let dir = s.random_unit_tangent(&x, &mut rng);
            let closed = estimate_hessian_form(&s, &x, &dir, &pts).unwrap();
            let fd = hessian_form_fd(&s, &x, &dir, &pts, 1e-3).unwrap();
            assert!((closed.value - fd.value).abs() < 0.02 * closed.value.abs(), "{closed:?} vs {fd:?}");
        }
    }

    #[test]
    fn fd_hessian_converges_quadratically() {
        let s = Sphere::new(2).unwrap();
        let z = s.point(&[0.0, 0.0, 1.0]).unwrap();
        let x = s.point(&[0.3, 0.0, 1.0]).unwrap();
        let u = s.tangent_basis(&x)[1].clone();
        let exact = estimate_hessian_form(&s, &x, &u, std::slice::from_ref(&z)).unwrap().value;
        let errs: Vec<f64> = [0.08, 0.04, 0.02]
            .iter()
            .map(|&h| (hessian_form_fd(&s, &x, &u, std::slice::from_ref(&z), h).unwrap().value - exact).abs())
            .collect();
        for w in errs.windows(2) {
            let slope = (w[0] / w[1]).log2();
            assert!((slope - 2.0).abs() < 0.3, "{errs:?}");
        }
    }

    #[test]
    fn trajectory_csv() {
        let mut w = TrajectoryCsvWriter::new(Vec::new(), &["x0".into()]).unwrap();
        w.write(&TrajectoryRow { n: 0, coords: vec![1.0], distance_to_minimizer: None, u: -1.0 }).unwrap();
        w.write(&TrajectoryRow { n: 1, coords: vec![0.5], distance_to_minimizer: Some(0.25), u: 2.0 }).unwrap();
        let text = String::from_utf8(w.finish().unwrap()).unwrap();
        assert_eq!(text, "n,x0,dist_to_min,u\n0,1,,-1\n1,0.5,0.25,2\n");
    }
}
