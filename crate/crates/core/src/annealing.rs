//! Simulated annealing, the comparison baseline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::Manifold;
use crate::objective::Objective;
use crate::sampler::{run_scheduled, ChainConfig, ProposalKernel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AnnealingSchedule {
    /// `T_n = t0 * ratio^floor((n - 1) / steps_per_level)`.
    Geometric { t0: f64, ratio: f64, steps_per_level: u64 },
    /// `T_n = c / ln(n + offset)`.
    Logarithmic { c: f64, offset: f64 },
    Constant { t: f64 },
}

impl AnnealingSchedule {
    pub fn geometric() -> Self {
        AnnealingSchedule::Geometric { t0: 1.0, ratio: 0.995, steps_per_level: 1 }
    }

    pub fn logarithmic() -> Self {
        AnnealingSchedule::Logarithmic { c: 1.0, offset: std::f64::consts::E }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            AnnealingSchedule::Geometric { t0, ratio, steps_per_level } => {
                t0 > 0.0 && t0.is_finite() && ratio > 0.0 && ratio <= 1.0 && steps_per_level > 0
            }
            AnnealingSchedule::Logarithmic { c, offset } => c > 0.0 && c.is_finite() && offset > 0.0 && offset.is_finite(),
            AnnealingSchedule::Constant { t } => t > 0.0 && t.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("invalid annealing schedule {self:?}")))
        }
    }

    /// Temperature at step `n >= 1`. Geometric schedules bottom out at the
    /// smallest positive normal `f64` instead of underflowing to zero.
    pub fn temperature(&self, n: u64) -> f64 {
        match *self {
            AnnealingSchedule::Geometric { t0, ratio, steps_per_level } => {
                let level = (n.max(1) - 1) / steps_per_level;
                (t0 * ratio.powf(level as f64)).max(f64::MIN_POSITIVE)
            }
            AnnealingSchedule::Logarithmic { c, offset } => c / (n as f64 + offset).ln(),
            AnnealingSchedule::Constant { t } => t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnnealingRow {
    pub n: u64,
    pub temperature: f64,
    pub value: f64,
    pub best_value: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone)]
pub struct AnnealingOutcome<P> {
    pub final_point: P,
    pub final_value: f64,
    pub best_point: P,
    pub best_value: f64,
    pub acceptance_rate: f64,
}

/// Metropolis chain with temperature following `schedule`. Every step is
/// reported to `sink` together with the current point.
pub fn run_annealing<M, O, K, F>(
    init: M::Point,
    u: &O,
    schedule: &AnnealingSchedule,
    kernel: &K,
    steps: u64,
    seed: u64,
    mut sink: F,
) -> Result<AnnealingOutcome<M::Point>>
where
    M: Manifold,
    O: Objective<M>,
    K: ProposalKernel<M>,
    F: FnMut(&M::Point, &AnnealingRow),
{
    schedule.validate()?;
    if steps == 0 {
        return Err(Error::invalid("annealing needs at least one step"));
    }
    let start_value = u.eval(&init);
    let mut best = (init.clone(), start_value);
    let cfg = ChainConfig { steps, burn_in: 0, seed, stream: 0 };
    let outcome = run_scheduled(init, u, |n| schedule.temperature(n), kernel, &cfg, |z, info| {
        if info.value < best.1 {
            best = (z.clone(), info.value);
        }
        let row = AnnealingRow {
            n: info.step,
            temperature: info.temperature,
            value: info.value,
            best_value: best.1,
            accepted: info.accepted,
        };
        sink(z, &row);
    })?;
    Ok(AnnealingOutcome {
        final_point: outcome.state.z,
        final_value: outcome.state.value,
        best_point: best.0,
        best_value: best.1,
        acceptance_rate: outcome.acceptance_rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::Sphere;
    use crate::objective::{objective_legendre_sphere, SquaredDistance};
    use crate::sampler::{run_chain, VonMisesFisher};

    #[test]
    fn schedules_are_positive_and_nonincreasing() {
        for s in [AnnealingSchedule::geometric(), AnnealingSchedule::logarithmic(), AnnealingSchedule::Constant { t: 0.2 }] {
            s.validate().unwrap();
            let mut last = f64::INFINITY;
            for n in 1..10_000 {
                let t = s.temperature(n);
                assert!(t > 0.0 && t <= last);
                last = t;
            }
        }
        assert_eq!(AnnealingSchedule::geometric().temperature(1), 1.0);
        assert!(AnnealingSchedule::Geometric { t0: 1.0, ratio: 1.5, steps_per_level: 1 }.validate().is_err());
    }

    #[test]
    fn constant_schedule_reproduces_fixed_temperature_chain() {
        let u = objective_legendre_sphere();
        let s = u.manifold().clone();
        let x0 = s.point(&[0.0, 0.0, -1.0]).unwrap();
        let k = VonMisesFisher::default();
        let mut a = Vec::new();
        run_annealing(x0.clone(), &u, &AnnealingSchedule::Constant { t: 0.2 }, &k, 2000, 3, |z, _| {
            a.push(z.coords().clone())
        })
        .unwrap();
        let mut b = Vec::new();
        run_chain(x0, &u, 0.2, &k, &ChainConfig { steps: 2000, burn_in: 0, seed: 3, stream: 0 }, |z, _| {
            b.push(z.coords().clone())
        })
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn best_so_far_is_monotone_and_deterministic() {
        let u = objective_legendre_sphere();
        let s = u.manifold().clone();
        let x0 = s.point(&[0.0, 0.0, -1.0]).unwrap();
        let k = VonMisesFisher::default();
        let run = || {
            let mut rows = Vec::new();
            let o = run_annealing(x0.clone(), &u, &AnnealingSchedule::logarithmic(), &k, 3000, 4, |_, r| rows.push(*r)).unwrap();
            (rows, o.best_value)
        };
        let (rows, best) = run();
        for w in rows.windows(2) {
            assert!(w[1].best_value <= w[0].best_value);
        }
        assert_eq!(rows.last().unwrap().best_value, best);
        assert_eq!(run().0, rows);
    }

    #[test]
    fn geometric_schedule_stays_positive() {
        let s = AnnealingSchedule::Geometric { t0: 1e-3, ratio: 0.5, steps_per_level: 1 };
        assert_eq!(s.temperature(5000), f64::MIN_POSITIVE);
    }

    #[test]
    fn geometric_schedule_finds_minimum_of_convex_objective() {
        let s = Sphere::new(2).unwrap();
        let c = s.point(&[0.3, -0.2, 0.9]).unwrap();
        let u = SquaredDistance::new(s.clone(), c.clone(), 1.0).unwrap();
        let o = run_annealing(
            s.point(&[0.0, 0.0, -1.0]).unwrap(),
            &u,
            &AnnealingSchedule::geometric(),
            &VonMisesFisher::default(),
            5000,
            5,
            |_, _| {},
        )
        .unwrap();
        assert!(s.distance(&o.final_point, &c) < 0.05);
    }
}
