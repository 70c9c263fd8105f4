//! Symmetric Metropolis-Hastings targeting `P_T ∝ exp(-U/T)`.

use std::f64::consts::PI;
use std::io::Write;

use log::debug;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Beta, Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::manifold::{CMatrix, Grassmann, Manifold, Projector, Sphere, SpherePoint};
use crate::objective::Objective;
use crate::rng::stream_rng;
use crate::special::integrate;
use crate::temperature::unit_sphere_area;

/// A proposal with a symmetric density `q(x, z) = q(z, x)` w.r.t. volume.
pub trait ProposalKernel<M: Manifold>: Send + Sync {
    fn propose<R: Rng + ?Sized>(&self, m: &M, x: &M::Point, rng: &mut R) -> M::Point;

    /// `inf_{x,z} q(x, z)` when known.
    fn min_density(&self, _m: &M) -> Option<f64> {
        None
    }

    fn describe(&self) -> KernelDescription;
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelDescription {
    VonMisesFisher { concentration: f64 },
    UnitaryConjugation { step_scale: f64 },
    Custom { name: String },
}

/// von Mises-Fisher proposal on `S^n` centred at the current point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VonMisesFisher {
    concentration: f64,
}

impl Default for VonMisesFisher {
    fn default() -> Self {
        VonMisesFisher { concentration: 20.0 }
    }
}

impl VonMisesFisher {
    pub fn new(concentration: f64) -> Result<Self> {
        if !(concentration > 0.0 && concentration.is_finite()) {
            return Err(Error::invalid("vMF concentration must be positive and finite"));
        }
        Ok(VonMisesFisher { concentration })
    }

    pub fn concentration(&self) -> f64 {
        self.concentration
    }

    /// Draw the cosine `w = <mean, z>` for the ambient dimension `p`.
    pub fn sample_cosine<R: Rng + ?Sized>(&self, p: usize, rng: &mut R) -> f64 {
        let k = self.concentration;
        if p == 3 {
            let u: f64 = rng.random();
            // inverse CDF of the density ∝ exp(k w) on [-1, 1]
            return (1.0 + (u + (1.0 - u) * (-2.0 * k).exp()).ln() / k).clamp(-1.0, 1.0);
        }
        // Wood's rejection sampler
        let d = (p - 1) as f64;
        let b = d / ((4.0 * k * k + d * d).sqrt() + 2.0 * k);
        let x0 = (1.0 - b) / (1.0 + b);
        let c = k * x0 + d * (1.0 - x0 * x0).ln();
        let beta = Beta::new(d / 2.0, d / 2.0).expect("positive shape");
        loop {
            let z: f64 = beta.sample(rng);
            let w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
            let u: f64 = rng.random();
            if k * w + d * (1.0 - x0 * w).ln() - c >= u.ln() {
                return w.clamp(-1.0, 1.0);
            }
        }
    }

    /// `ln` of the normalising constant `1 / int exp(k <x, z>) dz` on `S^n`.
    pub fn ln_normalizer(&self, n: usize) -> f64 {
        let k = self.concentration;
        // int exp(k cos t) sin^{n-1} t dt, scaled by exp(-k)
        let s = integrate(|t| (k * (t.cos() - 1.0)).exp() * t.sin().powi(n as i32 - 1), 0.0, PI, 64, 16);
        -(k + s.ln() + unit_sphere_area(n).ln())
    }
}

impl ProposalKernel<Sphere> for VonMisesFisher {
    fn propose<R: Rng + ?Sized>(&self, m: &Sphere, x: &SpherePoint, rng: &mut R) -> SpherePoint {
        let p = m.ambient_dim();
        let w = self.sample_cosine(p, rng);
        let mean = x.coords();
        let dir = loop {
            let g = DVector::<f64>::from_fn(p, |_, _| rng.sample(StandardNormal));
            let t = &g - mean * mean.dot(&g);
            let n = t.norm();
            if n > 1e-12 {
                break t / n;
            }
        };
        SpherePoint::renormalize(mean * w + dir * (1.0 - w * w).max(0.0).sqrt())
    }

    fn min_density(&self, m: &Sphere) -> Option<f64> {
        // attained at antipodal pairs
        Some((self.ln_normalizer(m.dim()) - self.concentration).exp())
    }

    fn describe(&self) -> KernelDescription {
        KernelDescription::VonMisesFisher { concentration: self.concentration }
    }
}

/// `z = u x u*` with `u = exp(i s H)` and `H` a GUE draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitaryConjugation {
    step_scale: f64,
}

impl Default for UnitaryConjugation {
    fn default() -> Self {
        UnitaryConjugation { step_scale: 0.2 }
    }
}

impl UnitaryConjugation {
    pub fn new(step_scale: f64) -> Result<Self> {
        if !(step_scale > 0.0 && step_scale.is_finite()) {
            return Err(Error::invalid("step scale must be positive and finite"));
        }
        Ok(UnitaryConjugation { step_scale })
    }

    pub fn step_scale(&self) -> f64 {
        self.step_scale
    }

    /// Random unitary `exp(i s H)`; `H` and `-H` have the same law.
    pub fn random_unitary<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> CMatrix {
        let mut h = CMatrix::zeros(n, n);
        for i in 0..n {
            h[(i, i)] = Complex64::new(rng.sample(StandardNormal), 0.0);
            for j in 0..i {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                let z = Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2;
                h[(i, j)] = z;
                h[(j, i)] = z.conj();
            }
        }
        let eig = SymmetricEigen::new(h);
        let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::from_polar(1.0, self.step_scale * l)));
        &eig.eigenvectors * phases * eig.eigenvectors.adjoint()
    }
}

impl ProposalKernel<Grassmann> for UnitaryConjugation {
    fn propose<R: Rng + ?Sized>(&self, m: &Grassmann, x: &Projector, rng: &mut R) -> Projector {
        let u = self.random_unitary(m.n(), rng);
        Projector::from_basis(&(u * x.basis())).expect("unitary image of a frame has full rank")
    }

    fn describe(&self) -> KernelDescription {
        KernelDescription::UnitaryConjugation { step_scale: self.step_scale }
    }
}

/// Current state of a chain.
#[derive(Debug, Clone)]
pub struct ChainState<P> {
    pub z: P,
    /// `U(z)`.
    pub value: f64,
    pub step: u64,
    pub accepted: u64,
}

impl<P> ChainState<P> {
    pub fn acceptance_rate(&self) -> f64 {
        if self.step == 0 {
            0.0
        } else {
            self.accepted as f64 / self.step as f64
        }
    }
}

/// `1 - min(1, exp((U_old - U_new) / T))`.
pub fn rejection_probability(u_old: f64, u_new: f64, t: f64) -> f64 {
    1.0 - ((u_old - u_new) / t).exp().min(1.0)
}

pub fn initial_state<M: Manifold, O: Objective<M>>(u: &O, z: M::Point) -> Result<ChainState<M::Point>> {
    u.manifold().check_point(&z)?;
    let value = u.eval(&z);
    if !value.is_finite() {
        return Err(Error::NonFiniteObjective { step: 0, value });
    }
    Ok(ChainState { z, value, step: 0, accepted: 0 })
}

/// One proposal and accept/reject. Returns whether the proposal was accepted.
pub fn mh_step<M, O, K, R>(state: &mut ChainState<M::Point>, u: &O, t: f64, kernel: &K, rng: &mut R) -> Result<bool>
where
    M: Manifold,
    O: Objective<M>,
    K: ProposalKernel<M>,
    R: Rng + ?Sized,
{
    if !(t > 0.0) {
        return Err(Error::invalid(format!("temperature must be positive, got {t}")));
    }
    let z = kernel.propose(u.manifold(), &state.z, rng);
    let value = u.eval(&z);
    state.step += 1;
    if !value.is_finite() {
        return Err(Error::NonFiniteObjective { step: state.step, value });
    }
    let r = rejection_probability(state.value, value, t);
    let draw: f64 = rng.random();
    if draw < r {
        return Ok(false);
    }
    state.z = z;
    state.value = value;
    state.accepted += 1;
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainConfig {
    pub steps: u64,
    pub burn_in: u64,
    pub seed: u64,
    /// Stream index, so that independent chains can share a seed.
    pub stream: u64,
}

impl ChainConfig {
    /// `steps` iterations with the default 10% burn-in.
    pub fn new(steps: u64, seed: u64) -> Self {
        ChainConfig { steps, burn_in: steps / 10, seed, stream: 0 }
    }

    pub fn with_burn_in(mut self, burn_in: u64) -> Self {
        self.burn_in = burn_in;
        self
    }

    pub fn with_stream(mut self, stream: u64) -> Self {
        self.stream = stream;
        self
    }
}

/// A post-burn-in sample handed to the consumer.
#[derive(Debug, Clone, Copy)]
pub struct SampleInfo {
    pub step: u64,
    pub value: f64,
    pub accepted: bool,
    pub temperature: f64,
}

#[derive(Debug, Clone)]
pub struct ChainOutcome<P> {
    pub state: ChainState<P>,
    pub acceptance_rate: f64,
}

const INVARIANT_CHECK_EVERY: u64 = 1000;

/// Chain with temperature `schedule(n)` at step `n = 1, 2, ...`.
pub fn run_scheduled<M, O, K, F>(
    init: M::Point,
    u: &O,
    schedule: impl Fn(u64) -> f64,
    kernel: &K,
    cfg: &ChainConfig,
    mut sink: F,
) -> Result<ChainOutcome<M::Point>>
where
    M: Manifold,
    O: Objective<M>,
    K: ProposalKernel<M>,
    F: FnMut(&M::Point, &SampleInfo),
{
    if cfg.steps <= cfg.burn_in {
        return Err(Error::invalid(format!(
            "steps ({}) must exceed burn_in ({})",
            cfg.steps, cfg.burn_in
        )));
    }
    let m = u.manifold();
    let mut rng = stream_rng(cfg.seed, cfg.stream);
    let mut state = initial_state(u, init)?;
    for n in 1..=cfg.steps {
        let t = schedule(n);
        let accepted = mh_step(&mut state, u, t, kernel, &mut rng)?;
        if n % INVARIANT_CHECK_EVERY == 0 {
            m.check_point(&state.z)?;
        }
        if n > cfg.burn_in {
            let info = SampleInfo { step: n, value: state.value, accepted, temperature: t };
            sink(&state.z, &info);
        }
    }
    let acceptance_rate = state.acceptance_rate();
    debug!("chain finished: {} steps, acceptance {acceptance_rate:.3}", cfg.steps);
    Ok(ChainOutcome { state, acceptance_rate })
}

/// Chain at fixed temperature `t`; post-burn-in samples go to `sink`.
pub fn run_chain<M, O, K, F>(init: M::Point, u: &O, t: f64, kernel: &K, cfg: &ChainConfig, sink: F) -> Result<ChainOutcome<M::Point>>
where
    M: Manifold,
    O: Objective<M>,
    K: ProposalKernel<M>,
    F: FnMut(&M::Point, &SampleInfo),
{
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!("temperature must be positive and finite, got {t}")));
    }
    run_scheduled(init, u, |_| t, kernel, cfg, sink)
}

/// Post-burn-in samples together with the chain summary.
pub type Samples<P> = (Vec<P>, ChainOutcome<P>);

/// Collect the post-burn-in samples of a chain.
pub fn sample_chain<M, O, K>(init: M::Point, u: &O, t: f64, kernel: &K, cfg: &ChainConfig) -> Result<Samples<M::Point>>
where
    M: Manifold,
    O: Objective<M>,
    K: ProposalKernel<M>,
{
    let mut out = Vec::with_capacity((cfg.steps - cfg.burn_in.min(cfg.steps)) as usize);
    let outcome = run_chain(init, u, t, kernel, cfg, |z, _| out.push(z.clone()))?;
    Ok((out, outcome))
}

/// CSV sink with columns `step, <coords>, u, accepted`.
pub struct SampleCsvWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> SampleCsvWriter<W> {
    pub fn new(out: W, coord_labels: &[String]) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(out);
        let mut header = vec!["step".to_string()];
        header.extend(coord_labels.iter().cloned());
        header.push("u".into());
        header.push("accepted".into());
        inner.write_record(&header)?;
        Ok(SampleCsvWriter { inner })
    }

    pub fn write(&mut self, step: u64, coords: &[f64], value: f64, accepted: bool) -> Result<()> {
        let mut row = Vec::with_capacity(coords.len() + 3);
        row.push(step.to_string());
        row.extend(coords.iter().map(|c| c.to_string()));
        row.push(value.to_string());
        row.push(u8::from(accepted).to_string());
        self.inner.write_record(&row)?;
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
    use crate::objective::{objective_legendre_sphere, Constant, GrassmannTrace};
    use approx::assert_relative_eq;

    #[test]
    fn rejection_formula() {
        assert_eq!(rejection_probability(1.0, 0.5, 0.2), 0.0);
        assert_eq!(rejection_probability(1.0, 1.0, 0.2), 0.0);
        let t = 0.3;
        assert_relative_eq!(rejection_probability(0.0, t * 2f64.ln(), t), 0.5, max_relative = 1e-14);
    }

    #[test]
    fn vmf_concentrates() {
        let s = Sphere::new(2).unwrap();
        let x = s.point(&[0.0, 0.0, 1.0]).unwrap();
        let k = VonMisesFisher::new(1e4).unwrap();
        let mut rng = stream_rng(1, 0);
        let mean: f64 = (0..2000).map(|_| s.distance(&x, &k.propose(&s, &x, &mut rng))).sum::<f64>() / 2000.0;
        assert!(mean < 0.05, "{mean}");
    }

    #[test]
    fn vmf_cosine_mean_matches_closed_form() {
        // E<x, z> = coth k - 1/k on S^2
        let mut rng = stream_rng(2, 0);
        for p in [3usize, 4] {
            let k = VonMisesFisher::new(5.0).unwrap();
            let n = 200_000;
            let mean = (0..n).map(|_| k.sample_cosine(p, &mut rng)).sum::<f64>() / n as f64;
            // oracle by quadrature of w exp(k w) (1-w^2)^{(p-3)/2}
            let e = |f: &dyn Fn(f64) -> f64| integrate(|t| f(t.cos()) * (5.0 * t.cos()).exp() * t.sin().powi(p as i32 - 2), 0.0, PI, 64, 16);
            let oracle = e(&|w| w) / e(&|_| 1.0);
            assert!((mean - oracle).abs() < 4e-3, "p={p}: {mean} vs {oracle}");
        }
    }

    #[test]
    fn vmf_normalizer_on_s2() {
        let k = VonMisesFisher::new(3.0).unwrap();
        let exact = (3.0 / (4.0 * PI * 3f64.sinh())).ln();
        assert_relative_eq!(k.ln_normalizer(2), exact, max_relative = 1e-12);
        let s = Sphere::new(2).unwrap();
        assert_relative_eq!(k.min_density(&s).unwrap(), exact.exp() * (-3f64).exp(), max_relative = 1e-10);
    }

    #[test]
    fn vmf_symmetry_in_distance_law() {
        // q depends on <x, z> only, so the law of d(x, z) is the same at any x
        let s = Sphere::new(2).unwrap();
        let k = VonMisesFisher::new(4.0).unwrap();
        let a = s.point(&[0.0, 0.0, 1.0]).unwrap();
        let b = s.point(&[0.0, 0.0, -1.0]).unwrap();
        let mut r1 = stream_rng(3, 0);
        let mut r2 = stream_rng(3, 1);
        let mut h1 = [0usize; 10];
        let mut h2 = [0usize; 10];
        let n = 100_000;
        for _ in 0..n {
            let d1 = s.distance(&a, &k.propose(&s, &a, &mut r1));
            let d2 = s.distance(&b, &k.propose(&s, &b, &mut r2));
            h1[((d1 / PI * 10.0) as usize).min(9)] += 1;
            h2[((d2 / PI * 10.0) as usize).min(9)] += 1;
        }
        for i in 0..10 {
            let p = (h1[i] + h2[i]) as f64 / (2.0 * n as f64);
            let se = (2.0 * p * (1.0 - p) / n as f64).sqrt();
            let diff = (h1[i] as f64 - h2[i] as f64) / n as f64;
            assert!(diff.abs() <= 5.0 * se + 1e-12, "bin {i}");
        }
    }

    #[test]
    fn unitary_proposal_keeps_projector() {
        let g = Grassmann::new(2, 4).unwrap();
        let k = UnitaryConjugation::default();
        let mut rng = stream_rng(4, 0);
        let mut x = Projector::coordinate(4, &[0, 1]).unwrap();
        for _ in 0..1000 {
            x = k.propose(&g, &x, &mut rng);
        }
        g.check_point(&x).unwrap();
        let u = k.random_unitary(4, &mut rng);
        let id = &u * u.adjoint();
        assert!((id - CMatrix::identity(4, 4)).norm() < 1e-12);
    }

    #[test]
    fn constant_objective_gives_uniform_height() {
        let s = Sphere::new(2).unwrap();
        let u = Constant::new(s.clone(), 1.0);
        let k = VonMisesFisher::new(2.0).unwrap();
        let cfg = ChainConfig::new(100_000, 11).with_burn_in(1000);
        let mut heights = Vec::new();
        let out = run_chain(s.point(&[0.0, 0.0, 1.0]).unwrap(), &u, 0.5, &k, &cfg, |z, _| {
            heights.push(z.coords()[2])
        })
        .unwrap();
        assert_eq!(out.acceptance_rate, 1.0);
        // thin to weaken autocorrelation, then KS against Uniform[-1, 1]
        let mut thin: Vec<f64> = heights.iter().step_by(10).cloned().collect();
        thin.sort_by(|a, b| a.total_cmp(b));
        let n = thin.len() as f64;
        let ks = thin
            .iter()
            .enumerate()
            .map(|(i, h)| {
                let f = (h + 1.0) / 2.0;
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 1.63 / n.sqrt(), "KS statistic {ks}");
    }

    #[test]
    fn chain_is_deterministic_and_reports_acceptance() {
        let u = objective_legendre_sphere();
        let s = u.manifold().clone();
        let k = VonMisesFisher::default();
        let cfg = ChainConfig::new(3000, 5);
        let run = || {
            let mut v = Vec::new();
            let o = run_chain(s.point(&[0.0, 0.0, -1.0]).unwrap(), &u, 0.2, &k, &cfg, |z, i| {
                v.push((i.step, z.coords()[2]))
            })
            .unwrap();
            (v, o.acceptance_rate)
        };
        let (a, ra) = run();
        let (b, rb) = run();
        assert_eq!(a, b);
        assert_eq!(ra, rb);
        assert_eq!(a.len(), 2700);
        assert!(ra > 0.05 && ra < 0.95, "{ra}");
    }

    #[test]
    fn bad_config_is_rejected() {
        let u = objective_legendre_sphere();
        let x = u.known_minimizer().unwrap();
        let k = VonMisesFisher::default();
        assert!(run_chain(x.clone(), &u, 0.2, &k, &ChainConfig::new(10, 0).with_burn_in(10), |_, _| {}).is_err());
        assert!(run_chain(x, &u, 0.0, &k, &ChainConfig::new(10, 0), |_, _| {}).is_err());
    }

    #[test]
    fn non_finite_objective_aborts() {
        struct Bad(Sphere);
        impl Objective<Sphere> for Bad {
            fn manifold(&self) -> &Sphere {
                &self.0
            }
            fn eval(&self, x: &SpherePoint) -> f64 {
                if x.coords()[2] < 0.9 { f64::NAN } else { 0.0 }
            }
            fn known_minimizer(&self) -> Option<SpherePoint> {
                None
            }
        }
        let s = Sphere::new(2).unwrap();
        let u = Bad(s.clone());
        let k = VonMisesFisher::new(1.0).unwrap();
        let r = run_chain(s.point(&[0.0, 0.0, 1.0]).unwrap(), &u, 1.0, &k, &ChainConfig::new(1000, 0), |_, _| {});
        assert!(matches!(r, Err(Error::NonFiniteObjective { .. })));
    }

    #[test]
    fn grassmann_chain_runs() {
        let u = GrassmannTrace::diagonal(&[4.0, 3.0, 2.0, 1.0], 2).unwrap();
        let k = UnitaryConjugation::default();
        let out = run_chain(Projector::coordinate(4, &[2, 3]).unwrap(), &u, 0.5, &k, &ChainConfig::new(2000, 1), |_, _| {}).unwrap();
        assert!(out.acceptance_rate > 0.0);
        u.manifold().check_point(&out.state.z).unwrap();
    }

    #[test]
    fn csv_layout() {
        let mut w = SampleCsvWriter::new(Vec::new(), &["x0".into(), "x1".into()]).unwrap();
        w.write(1, &[0.5, -0.25], 1.0, true).unwrap();
        let text = String::from_utf8(w.finish().unwrap()).unwrap();
        assert_eq!(text, "step,x0,x1,u,accepted\n1,0.5,-0.25,1,1\n");
    }
}
