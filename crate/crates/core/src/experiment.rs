//! The optimiser loop: a Metropolis chain feeding the running barycentre.

use serde::Serialize;

use crate::barycentre::BarycentreTracker;
use crate::error::{Error, Result};
use crate::manifold::Manifold;
use crate::objective::Objective;
use crate::sampler::{run_chain, ChainConfig, ProposalKernel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimizeConfig {
    pub temperature: f64,
    pub steps: u64,
    /// Samples discarded before the barycentre starts tracking.
    pub burn_in: u64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct OptimizeOutcome<P> {
    pub x_hat: P,
    pub value: f64,
    pub distance_to_minimizer: Option<f64>,
    pub acceptance_rate: f64,
    pub samples_used: u64,
}

/// Run the chain from `x0` and track the barycentre of its samples.
///
/// `on_step(n, x_hat_n)` sees the barycentre after every step, starting with
/// `n = 0` and the initial guess.
pub fn optimize<M, O, K, F>(x0: M::Point, u: &O, kernel: &K, cfg: &OptimizeConfig, mut on_step: F) -> Result<OptimizeOutcome<M::Point>>
where
    M: Manifold + Clone,
    O: Objective<M>,
    K: ProposalKernel<M>,
    F: FnMut(u64, &M::Point),
{
    let m = u.manifold();
    m.check_point(&x0)?;
    if !(cfg.temperature > 0.0 && cfg.temperature.is_finite()) {
        return Err(Error::invalid(format!("temperature must be positive, got {}", cfg.temperature)));
    }
    let star = u.known_minimizer();
    on_step(0, &x0);
    if cfg.steps == 0 {
        return Ok(OptimizeOutcome {
            value: u.eval(&x0),
            distance_to_minimizer: star.map(|s| m.distance(&x0, &s)),
            x_hat: x0,
            acceptance_rate: 0.0,
            samples_used: 0,
        });
    }
    let mut tracker = BarycentreTracker::with_initial(m, x0.clone());
    let chain = ChainConfig { steps: cfg.steps, burn_in: cfg.burn_in, seed: cfg.seed, stream: 0 };
    let mut last = 0;
    let outcome = run_chain(x0.clone(), u, cfg.temperature, kernel, &chain, |z, info| {
        for n in last + 1..info.step {
            // burn-in steps leave the barycentre at the initial guess
            on_step(n, tracker.estimate().expect("initialised"));
        }
        last = info.step;
        let x = tracker.update(z);
        on_step(info.step, x);
    })?;
    let x_hat = tracker.estimate().expect("initialised").clone();
    Ok(OptimizeOutcome {
        value: u.eval(&x_hat),
        distance_to_minimizer: star.map(|s| m.distance(&x_hat, &s)),
        acceptance_rate: outcome.acceptance_rate,
        samples_used: tracker.count(),
        x_hat,
    })
}
