//! Local and global shape of an objective around its known minimiser.
//!
//! The temperature calculus needs an enclosing interval for the Hessian
//! spectrum at `x*`, a radius on which `U` is sandwiched between two
//! quadratics, and the gap `inf {U(x) - U(x*) : d(x, x*) >= r}` for a couple of
//! radii. None of these are available in closed form for a black-box `U`, so
//! they are estimated here.

use log::debug;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::manifold::Manifold;
use crate::objective::Objective;
use crate::rng::stream_rng;

#[derive(Debug, Clone, Serialize)]
pub struct ProfileOptions {
    /// Relative padding applied to the extreme Hessian eigenvalues.
    pub pad: f64,
    /// Finite-difference step in normal coordinates.
    pub fd_step: f64,
    /// Samples used to certify the quadratic sandwich at each trial radius.
    pub sandwich_samples: usize,
    /// Uniform samples used for each gap infimum.
    pub search_samples: usize,
    pub seed: u64,
    pub max_halvings: usize,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        ProfileOptions {
            pad: 0.05,
            fd_step: 1e-4,
            sandwich_samples: 10_000,
            search_samples: 1_000_000,
            seed: 0x5eed,
            max_halvings: 60,
        }
    }
}

/// Estimated minimiser data. Point-free so it can be serialised and shared.
#[derive(Debug, Clone, Serialize)]
pub struct MinimizerProfile {
    pub dim: usize,
    pub x_star: Vec<f64>,
    pub u_star: f64,
    pub hessian_eigenvalues: Vec<f64>,
    pub pad: f64,
    pub mu_min: f64,
    pub mu_max: f64,
    pub rho: f64,
    /// `inf {U(x) - U(x*) : d(x, x*) >= rho}`.
    pub u_rho: f64,
}

impl MinimizerProfile {
    /// Profile with every field supplied by the caller, for analytic objectives.
    pub fn from_parts(dim: usize, u_star: f64, mu_min: f64, mu_max: f64, rho: f64, u_rho: f64) -> Result<Self> {
        if !(mu_min > 0.0 && mu_max >= mu_min && rho > 0.0 && u_rho > 0.0) {
            return Err(Error::invalid("profile requires 0 < mu_min <= mu_max, rho > 0 and u_rho > 0"));
        }
        Ok(MinimizerProfile {
            dim,
            x_star: Vec::new(),
            u_star,
            hessian_eigenvalues: vec![mu_min, mu_max],
            pad: 0.0,
            mu_min,
            mu_max,
            rho,
            u_rho,
        })
    }
}

const CHUNK: usize = 4096;

fn check_options(opts: &ProfileOptions) -> Result<()> {
    if !(opts.pad > 0.0 && opts.pad < 1.0) {
        return Err(Error::invalid("pad must lie in (0, 1)"));
    }
    if !(opts.fd_step > 0.0) {
        return Err(Error::invalid("fd_step must be positive"));
    }
    if opts.sandwich_samples == 0 || opts.search_samples == 0 {
        return Err(Error::invalid("sample counts must be positive"));
    }
    Ok(())
}

/// Profile with default options apart from `pad`.
pub fn estimate_minimizer_profile<M, O>(u: &O, x_star: &M::Point, pad: f64) -> Result<MinimizerProfile>
where
    M: Manifold,
    O: Objective<M>,
{
    let opts = ProfileOptions { pad, ..ProfileOptions::default() };
    estimate_minimizer_profile_with(u, x_star, &opts)
}

pub fn estimate_minimizer_profile_with<M, O>(u: &O, x_star: &M::Point, opts: &ProfileOptions) -> Result<MinimizerProfile>
where
    M: Manifold,
    O: Objective<M>,
{
    check_options(opts)?;
    let m = u.manifold();
    m.check_point(x_star)?;
    let u_star = u.eval(x_star);
    if !u_star.is_finite() {
        return Err(Error::NonFiniteObjective { step: 0, value: u_star });
    }
    let basis = m.tangent_basis(x_star);
    let eig = hessian_eigenvalues(u, x_star, &basis, opts.fd_step);
    let lo = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(lo > 0.0) {
        return Err(Error::DegenerateMinimum(lo));
    }
    let mu_min = lo * (1.0 - opts.pad);
    let mu_max = hi * (1.0 + opts.pad);

    let d = m.descriptor();
    let mut rho = d.injectivity_radius.min(d.r_cx);
    let mut halvings = 0;
    while !sandwich_holds(u, x_star, u_star, &basis, rho, mu_min, mu_max, opts) {
        halvings += 1;
        if halvings > opts.max_halvings {
            return Err(Error::NoConvergence { iterations: halvings, residual: rho });
        }
        rho *= 0.5;
    }
    debug!("sandwich radius {rho} after {halvings} halvings");
    let u_rho = gap_outside(u, x_star, u_star, &basis, rho, opts);

    Ok(MinimizerProfile {
        dim: m.dim(),
        x_star: m.coords(x_star),
        u_star,
        hessian_eigenvalues: eig,
        pad: opts.pad,
        mu_min,
        mu_max,
        rho,
        u_rho,
    })
}

/// `inf {U(x) - U(x*) : d(x, x*) >= delta}` by sampling plus local refinement.
pub fn estimate_u_delta<M, O>(u: &O, x_star: &M::Point, delta: f64, opts: &ProfileOptions) -> Result<f64>
where
    M: Manifold,
    O: Objective<M>,
{
    check_options(opts)?;
    let m = u.manifold();
    m.check_point(x_star)?;
    if !(delta > 0.0 && delta < m.descriptor().injectivity_radius) {
        return Err(Error::invalid(format!("radius {delta} outside (0, injectivity radius)")));
    }
    let u_star = u.eval(x_star);
    let basis = m.tangent_basis(x_star);
    Ok(gap_outside(u, x_star, u_star, &basis, delta, opts))
}

/// Hessian of `v -> U(exp(x, v))` at 0 in the given orthonormal basis.
pub fn hessian_eigenvalues<M, O>(u: &O, x: &M::Point, basis: &[M::Vector], h: f64) -> Vec<f64>
where
    M: Manifold,
    O: Objective<M>,
{
    let m = u.manifold();
    let n = basis.len();
    let at = |coef: &[(usize, f64)]| {
        let mut v = m.zero_vector(x);
        for &(i, c) in coef {
            v = m.axpy(&v, c, &basis[i]);
        }
        u.eval(&m.exp(x, &v))
    };
    let f0 = u.eval(x);
    let mut hess = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        hess[(i, i)] = (at(&[(i, h)]) - 2.0 * f0 + at(&[(i, -h)])) / (h * h);
        for j in 0..i {
            let v = (at(&[(i, h), (j, h)]) - at(&[(i, h), (j, -h)]) - at(&[(i, -h), (j, h)])
                + at(&[(i, -h), (j, -h)]))
                / (4.0 * h * h);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    let mut eig: Vec<f64> = SymmetricEigen::new(hess).eigenvalues.iter().cloned().collect();
    eig.sort_by(|a, b| a.total_cmp(b));
    eig
}

fn random_direction<M: Manifold, R: Rng + ?Sized>(m: &M, x: &M::Point, basis: &[M::Vector], rng: &mut R) -> M::Vector {
    loop {
        let mut v = m.zero_vector(x);
        for e in basis {
            let c: f64 = rng.sample(StandardNormal);
            v = m.axpy(&v, c, e);
        }
        let n = m.norm(x, &v);
        if n > 1e-12 {
            return m.scale(&v, 1.0 / n);
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn sandwich_holds<M, O>(
    u: &O,
    x_star: &M::Point,
    u_star: f64,
    basis: &[M::Vector],
    rho: f64,
    mu_min: f64,
    mu_max: f64,
    opts: &ProfileOptions,
) -> bool
where
    M: Manifold,
    O: Objective<M>,
{
    let m = u.manifold();
    let dim = basis.len() as f64;
    let slack = 1e-12 * (1.0 + u_star.abs());
    let chunks = opts.sandwich_samples.div_ceil(CHUNK);
    (0..chunks).into_par_iter().all(|c| {
        let mut rng = stream_rng(opts.seed, 1_000_000 + c as u64);
        let count = CHUNK.min(opts.sandwich_samples - c * CHUNK);
        (0..count).all(|i| {
            let dir = random_direction(m, x_star, basis, &mut rng);
            // every tenth probe sits on the boundary sphere
            let r = if i % 10 == 0 { rho } else { rho * rng.random::<f64>().powf(1.0 / dim) };
            let x = m.exp(x_star, &m.scale(&dir, r));
            let d = m.distance(&x, x_star);
            let gap = 2.0 * (u.eval(&x) - u_star);
            mu_min * d * d <= gap + slack && gap <= mu_max * d * d + slack
        })
    })
}

/// Pull `x` back onto the closed exterior of `B(center, radius)`.
fn push_outside<M: Manifold>(m: &M, center: &M::Point, x: M::Point, radius: f64) -> M::Point {
    let d = m.distance(center, &x);
    if d >= radius {
        return x;
    }
    match m.log(center, &x) {
        Ok(v) if d > 1e-12 => m.exp(center, &m.scale(&v, radius / d)),
        _ => {
            let e = m.tangent_basis(center).remove(0);
            m.exp(center, &m.scale(&e, radius))
        }
    }
}

fn gap_outside<M, O>(u: &O, x_star: &M::Point, u_star: f64, basis: &[M::Vector], radius: f64, opts: &ProfileOptions) -> f64
where
    M: Manifold,
    O: Objective<M>,
{
    let m = u.manifold();
    let total = opts.search_samples;
    let boundary = (total / 10).max(1);
    let chunks = total.div_ceil(CHUNK);
    let bchunks = boundary.div_ceil(CHUNK);
    let stream_base = 2_000_000 + (radius.to_bits() % 1_000_003) * 10_000;

    let interior = (0..chunks).into_par_iter().map(|c| {
        let mut rng = stream_rng(opts.seed, stream_base + c as u64);
        let count = CHUNK.min(total - c * CHUNK);
        let mut best: Option<(f64, M::Point)> = None;
        for _ in 0..count {
            let x = m.random_point(&mut rng);
            if m.distance(&x, x_star) < radius {
                continue;
            }
            let v = u.eval(&x);
            if best.as_ref().is_none_or(|b| v < b.0) {
                best = Some((v, x));
            }
        }
        best
    });
    let shell = (0..bchunks).into_par_iter().map(|c| {
        let mut rng = stream_rng(opts.seed, stream_base + 5_000 + c as u64);
        let count = CHUNK.min(boundary - c * CHUNK);
        let mut best: Option<(f64, M::Point)> = None;
        for _ in 0..count {
            let dir = random_direction(m, x_star, basis, &mut rng);
            let x = m.exp(x_star, &m.scale(&dir, radius));
            let v = u.eval(&x);
            if best.as_ref().is_none_or(|b| v < b.0) {
                best = Some((v, x));
            }
        }
        best
    });
    let mut candidates: Vec<Option<(f64, M::Point)>> = interior.collect();
    candidates.extend(shell.collect::<Vec<_>>());
    let (sampled, start) = candidates
        .into_iter()
        .flatten()
        .reduce(|a, b| if b.0 < a.0 { b } else { a })
        .expect("boundary probes are never empty");

    let refined = refine_outside(u, x_star, start, sampled, radius);
    let improvement = (sampled - refined).max(0.0);
    let gap = (refined - improvement - u_star).max(0.0);
    debug!("gap outside radius {radius}: sampled {sampled}, refined {refined}, reported {gap}");
    gap
}

/// Compass search restricted to the exterior of the ball.
fn refine_outside<M, O>(u: &O, center: &M::Point, start: M::Point, value: f64, radius: f64) -> f64
where
    M: Manifold,
    O: Objective<M>,
{
    let m = u.manifold();
    let mut x = start;
    let mut fx = value;
    let mut step = 0.05_f64.min(radius);
    let mut iters = 0;
    while step > 1e-10 && iters < 5000 {
        iters += 1;
        let basis = m.tangent_basis(&x);
        let mut moved = false;
        for e in &basis {
            for s in [step, -step] {
                let y = push_outside(m, center, m.exp(&x, &m.scale(e, s)), radius);
                let fy = u.eval(&y);
                if fy < fx {
                    x = y;
                    fx = fy;
                    moved = true;
                }
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    fx
}
