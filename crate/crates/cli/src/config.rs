//! Run configuration: TOML schema, defaults and validation.

use std::f64::consts::PI;
use std::path::Path;

use baryopt::annealing::AnnealingSchedule;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ManifoldSpec {
    Sphere { n: usize },
    Grassmann { k: usize, n: usize },
}

impl ManifoldSpec {
    /// Convexity radius for the metric used by the core crate.
    pub fn convexity_radius(&self) -> f64 {
        match self {
            ManifoldSpec::Sphere { .. } => PI / 2.0,
            ManifoldSpec::Grassmann { .. } => PI / 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectiveSpec {
    /// `U(x) = -P_9(x_3)` on the 2-sphere.
    Legendre9 {},
    /// `U(x) = -Re tr(C x)`; give either `diagonal` or `matrix` (plus optional `matrix_imag`).
    GrassmannTrace {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        diagonal: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        matrix: Option<Vec<Vec<f64>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        matrix_imag: Option<Vec<Vec<f64>>>,
    },
    /// `U(x) = base(g^{-1} x)`; `isometry` is a rotation on spheres and the
    /// real part of a unitary on Grassmannians.
    Transported {
        base: Box<ObjectiveSpec>,
        isometry: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        isometry_imag: Option<Vec<Vec<f64>>>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    VonMisesFisher { concentration: f64 },
    UnitaryConjugation { step_scale: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Temperature derived from the minimiser profile unless given explicitly.
    Oracle,
    /// Temperature must be given; no thresholds are computed.
    #[default]
    Blind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    #[serde(default = "defaults::pad")]
    pub pad: f64,
    #[serde(default = "defaults::search_samples")]
    pub search_samples: usize,
    #[serde(default = "defaults::sandwich_samples")]
    pub sandwich_samples: usize,
    #[serde(default = "defaults::profile_seed")]
    pub seed: u64,
}

impl Default for ProfileSpec {
    fn default() -> Self {
        ProfileSpec {
            pad: defaults::pad(),
            search_samples: defaults::search_samples(),
            sandwich_samples: defaults::sandwich_samples(),
            seed: defaults::profile_seed(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySpec {
    /// Explicit temperature grid; when absent, `temperature_factors * T_o`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperatures: Option<Vec<f64>>,
    #[serde(default = "defaults::temperature_factors")]
    pub temperature_factors: Vec<f64>,
    #[serde(default = "defaults::verify_samples")]
    pub samples: u64,
    #[serde(default = "defaults::probe_points")]
    pub probe_points: usize,
    #[serde(default = "defaults::directions")]
    pub directions: usize,
    /// Keep every `thinning`-th sample for the Hessian-form estimates.
    #[serde(default = "defaults::thinning")]
    pub thinning: usize,
    #[serde(default = "defaults::fd_step")]
    pub fd_step: f64,
    /// Rescale the proposal to the Gibbs width at each temperature.
    #[serde(default = "defaults::yes")]
    pub scale_kernel: bool,
}

impl Default for VerifySpec {
    fn default() -> Self {
        VerifySpec {
            temperatures: None,
            temperature_factors: defaults::temperature_factors(),
            samples: defaults::verify_samples(),
            probe_points: defaults::probe_points(),
            directions: defaults::directions(),
            thinning: defaults::thinning(),
            fd_step: defaults::fd_step(),
            scale_kernel: true,
        }
    }
}

/// A complete run description. After [`RunConfig::resolve`] every optional
/// field that has a default is filled in, so serialising it records exactly
/// what was run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub manifold: ManifoldSpec,
    pub objective: ObjectiveSpec,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelSpec>,
    #[serde(default = "defaults::steps")]
    pub steps: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<u64>,
    #[serde(default = "defaults::seeds")]
    pub seeds: Vec<u64>,
    /// Initial point in embedding coordinates (spheres only); seeded uniform otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<f64>>,
    #[serde(default = "defaults::success_radius")]
    pub success_radius: f64,
    #[serde(default = "defaults::schedules")]
    pub schedules: Vec<AnnealingSchedule>,
    #[serde(default)]
    pub profile: ProfileSpec,
    #[serde(default)]
    pub verify: VerifySpec,
}

mod defaults {
    use baryopt::annealing::AnnealingSchedule;

    pub fn pad() -> f64 {
        0.05
    }
    pub fn search_samples() -> usize {
        1_000_000
    }
    pub fn sandwich_samples() -> usize {
        10_000
    }
    pub fn profile_seed() -> u64 {
        0x5eed
    }
    pub fn temperature_factors() -> Vec<f64> {
        vec![1.0, 0.5, 0.25, 0.125, 0.0625]
    }
    pub fn verify_samples() -> u64 {
        1_000_000
    }
    pub fn probe_points() -> usize {
        50
    }
    pub fn directions() -> usize {
        10
    }
    pub fn thinning() -> usize {
        4
    }
    pub fn fd_step() -> f64 {
        1e-3
    }
    pub fn yes() -> bool {
        true
    }
    pub fn steps() -> u64 {
        5000
    }
    pub fn seeds() -> Vec<u64> {
        vec![0]
    }
    pub fn success_radius() -> f64 {
        0.15
    }
    pub fn schedules() -> Vec<AnnealingSchedule> {
        vec![
            AnnealingSchedule::geometric(),
            AnnealingSchedule::logarithmic(),
            AnnealingSchedule::Geometric { t0: 1.0, ratio: 0.999, steps_per_level: 1 },
        ]
    }
}

fn invalid(path: &str, message: impl Into<String>) -> CliError {
    CliError::Config { path: path.into(), message: message.into() }
}

fn positive(path: &str, v: f64) -> CliResult<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(path, format!("must be positive and finite, got {v}")))
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config { path: "<config>".into(), message: e.to_string() })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.display().to_string(), source: e })?;
        Self::from_toml(&text)
    }

    /// Fill defaults that depend on other fields, then validate.
    pub fn resolve(mut self, seed_override: Option<u64>) -> CliResult<Self> {
        if let Some(s) = seed_override {
            self.seeds = vec![s];
        }
        let r_cx = self.manifold.convexity_radius();
        self.delta.get_or_insert(0.3 * r_cx);
        self.kernel.get_or_insert(match self.manifold {
            ManifoldSpec::Sphere { .. } => KernelSpec::VonMisesFisher { concentration: 20.0 },
            ManifoldSpec::Grassmann { .. } => KernelSpec::UnitaryConjugation { step_scale: 0.2 },
        });
        let steps = self.steps;
        self.burn_in.get_or_insert(steps / 10);
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> CliResult<()> {
        match (&self.manifold, self.kernel) {
            (ManifoldSpec::Sphere { n }, Some(KernelSpec::VonMisesFisher { concentration })) => {
                if *n == 0 {
                    return Err(invalid("manifold.n", "sphere dimension must be at least 1"));
                }
                positive("kernel.concentration", concentration)?;
            }
            (ManifoldSpec::Grassmann { k, n }, Some(KernelSpec::UnitaryConjugation { step_scale })) => {
                if *k == 0 || k >= n {
                    return Err(invalid("manifold", format!("need 0 < k < n, got k = {k}, n = {n}")));
                }
                positive("kernel.step_scale", step_scale)?;
            }
            _ => return Err(invalid("kernel.kind", "kernel does not act on this manifold")),
        }
        if self.mode == Mode::Blind && self.temperature.is_none() {
            return Err(invalid("temperature", "blind mode needs an explicit temperature"));
        }
        if let Some(t) = self.temperature {
            positive("temperature", t)?;
        }
        let delta = self.delta.expect("resolved");
        let r_cx = self.manifold.convexity_radius();
        if !(delta > 0.0 && delta < r_cx / 2.0) {
            return Err(invalid("delta", format!("must lie in (0, r_cx/2) = (0, {:.6}), got {delta}", r_cx / 2.0)));
        }
        if let Some(e) = self.epsilon {
            positive("epsilon", e)?;
        }
        let burn_in = self.burn_in.expect("resolved");
        if self.steps > 0 && burn_in >= self.steps {
            return Err(invalid("burn_in", format!("must be smaller than steps = {}", self.steps)));
        }
        if self.seeds.is_empty() {
            return Err(invalid("seeds", "at least one seed is required"));
        }
        if self.initial.is_some() && !matches!(self.manifold, ManifoldSpec::Sphere { .. }) {
            return Err(invalid("initial", "explicit initial points are supported on spheres only"));
        }
        positive("success_radius", self.success_radius)?;
        for (i, s) in self.schedules.iter().enumerate() {
            s.validate().map_err(|e| invalid(&format!("schedules[{i}]"), e.to_string()))?;
        }
        positive("profile.pad", self.profile.pad)?;
        if self.profile.search_samples == 0 || self.profile.sandwich_samples == 0 {
            return Err(invalid("profile", "sample counts must be positive"));
        }
        let v = &self.verify;
        if let Some(ts) = &v.temperatures {
            if ts.is_empty() {
                return Err(invalid("verify.temperatures", "empty grid"));
            }
            for (i, &t) in ts.iter().enumerate() {
                positive(&format!("verify.temperatures[{i}]"), t)?;
            }
        } else {
            if v.temperature_factors.is_empty() {
                return Err(invalid("verify.temperature_factors", "empty grid"));
            }
            for (i, &t) in v.temperature_factors.iter().enumerate() {
                positive(&format!("verify.temperature_factors[{i}]"), t)?;
            }
        }
        if v.samples < 1000 {
            return Err(invalid("verify.samples", "need at least 1000 samples for blocked error estimates"));
        }
        if v.thinning == 0 || v.probe_points == 0 || v.directions == 0 {
            return Err(invalid("verify", "thinning, probe_points and directions must be positive"));
        }
        if v.samples / (v.thinning as u64) < 1000 {
            return Err(invalid("verify.thinning", "fewer than 1000 samples remain after thinning"));
        }
        positive("verify.fd_step", v.fd_step)?;
        Ok(())
    }

    pub fn delta(&self) -> f64 {
        self.delta.expect("resolved")
    }

    pub fn burn_in(&self) -> u64 {
        self.burn_in.expect("resolved")
    }
}
