//! Numerical checks of the concentration and convexity bounds.

use rand::Rng;
use serde::Serialize;

use crate::barycentre::{estimate_gradient, estimate_hessian_form, hessian_form_fd, wasserstein_to_dirac};
use crate::error::{Error, Result};
use crate::manifold::Manifold;
use crate::objective::Objective;
use crate::profile::MinimizerProfile;
use crate::rng::stream_rng;
use crate::sampler::{sample_chain, ChainConfig, ProposalKernel};
use crate::stats::FunctionalEstimate;
use crate::temperature::{hessian_lower_bound, wasserstein_bound, ConstantsTable};

/// Number of standard errors allowed in every check.
pub const SIGMA_MULTIPLE: f64 = 3.0;

/// Post-burn-in Gibbs samples from a chain started at `x0`, with 10% extra steps burnt.
pub fn gibbs_samples<M, O, K>(x0: &M::Point, u: &O, t: f64, kernel: &K, samples: u64, seed: u64) -> Result<Vec<M::Point>>
where
    M: Manifold,
    O: Objective<M>,
    K: ProposalKernel<M>,
{
    let burn = (samples / 10).max(1);
    let cfg = ChainConfig { steps: samples + burn, burn_in: burn, seed, stream: 0 };
    Ok(sample_chain(x0.clone(), u, t, kernel, &cfg)?.0)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConcentrationRow {
    pub temperature: f64,
    pub estimate: FunctionalEstimate,
    pub bound: f64,
    pub pass: bool,
}

/// Expected distance to `x*` against its bound at each temperature.
pub fn check_concentration<M, O, K>(
    u: &O,
    x_star: &M::Point,
    profile: &MinimizerProfile,
    temperatures: &[f64],
    samples: u64,
    seed: u64,
    kernel_for: impl Fn(f64) -> Result<K>,
) -> Result<Vec<ConcentrationRow>>
where
    M: Manifold,
    O: Objective<M>,
    K: ProposalKernel<M>,
{
    let m = u.manifold();
    let consts = ConstantsTable::new(m.descriptor());
    temperatures
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let kernel = kernel_for(t)?;
            let zs = gibbs_samples(x_star, u, t, &kernel, samples, seed.wrapping_add(i as u64))?;
            let estimate = wasserstein_to_dirac(m, x_star, &zs)?;
            let bound = wasserstein_bound(t, profile, &consts);
            let pass = estimate.value <= bound + SIGMA_MULTIPLE * estimate.std_error;
            Ok(ConcentrationRow { temperature: t, estimate, bound, pass })
        })
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Seeded probe points in the closed ball `B(x*, radius)`: the centre, then
/// points uniform by area of the normal-coordinate ball.
pub fn ball_probes<M: Manifold>(m: &M, x_star: &M::Point, radius: f64, count: usize, seed: u64) -> Vec<M::Point> {
    let mut rng = stream_rng(seed, 0);
    let dim = m.dim() as f64;
    let mut out = vec![x_star.clone()];
    while out.len() < count {
        let dir = m.random_unit_tangent(x_star, &mut rng);
        let r = radius * rng.random::<f64>().powf(1.0 / dim);
        out.push(m.exp(x_star, &m.scale(&dir, r)));
    }
    out.truncate(count);
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvexityProbe {
    pub point: usize,
    pub distance_to_minimizer: f64,
    pub direction: usize,
    pub estimate: FunctionalEstimate,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct ConvexitySetup {
    pub temperature: f64,
    pub delta: f64,
    pub u_delta: f64,
    pub a_m: f64,
    pub points: usize,
    pub directions: usize,
    pub seed: u64,
    /// Step for the finite-difference fallback on manifolds without a closed form.
    pub fd_step: f64,
}

/// Hessian-form estimates at probe points in `B(x*, delta)` against the lower bound.
pub fn check_convexity<M>(
    m: &M,
    x_star: &M::Point,
    samples: &[M::Point],
    profile: &MinimizerProfile,
    setup: &ConvexitySetup,
) -> Result<Vec<ConvexityProbe>>
where
    M: Manifold,
{
    let bound = hessian_lower_bound(setup.temperature, setup.delta, setup.u_delta, setup.a_m, profile, m.descriptor())?;
    let probes = ball_probes(m, x_star, setup.delta, setup.points, setup.seed);
    let mut rng = stream_rng(setup.seed, 1);
    let mut rows = Vec::with_capacity(setup.points * setup.directions);
    for (i, x) in probes.iter().enumerate() {
        for j in 0..setup.directions {
            let dir = m.random_unit_tangent(x, &mut rng);
            let estimate = match estimate_hessian_form(m, x, &dir, samples) {
                Err(Error::Unsupported(_)) => hessian_form_fd(m, x, &dir, samples, setup.fd_step)?,
                other => other?,
            };
            rows.push(ConvexityProbe {
                point: i,
                distance_to_minimizer: m.distance(x, x_star),
                direction: j,
                pass: estimate.value >= bound - SIGMA_MULTIPLE * estimate.std_error,
                estimate,
                bound,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct StationarityCheck {
    pub gradient_norm: f64,
    pub std_error: f64,
    pub components: Vec<f64>,
    pub component_std_errors: Vec<f64>,
    pub dropped: usize,
    pub pass: bool,
}

/// `|grad E_T(x*)| < 3 sigma`.
pub fn check_stationarity<M: Manifold>(m: &M, x_star: &M::Point, samples: &[M::Point]) -> Result<StationarityCheck> {
    let g = estimate_gradient(m, x_star, samples)?;
    Ok(StationarityCheck {
        gradient_norm: g.norm,
        std_error: g.norm_std_error,
        pass: g.norm < SIGMA_MULTIPLE * g.norm_std_error,
        components: g.components,
        component_std_errors: g.std_errors,
        dropped: g.dropped,
    })
}
