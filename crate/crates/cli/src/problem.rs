//! Turning a configuration into concrete manifolds, objectives and kernels.

use baryopt::manifold::{CMatrix, Grassmann, Manifold, Sphere};
use baryopt::objective::{GrassmannTrace, LegendreObjective, Objective, Transported};
use baryopt::rng::stream_rng;
use baryopt::sampler::{ProposalKernel, UnitaryConjugation, VonMisesFisher};
use nalgebra::{Complex, DMatrix};

use crate::config::{KernelSpec, ManifoldSpec, ObjectiveSpec, RunConfig};
use crate::error::{CliError, CliResult};

pub type Obj<S> = Box<dyn Objective<S>>;

/// A manifold together with its proposal kernel and point construction.
pub trait Space: Manifold + Clone + 'static {
    type Kernel: ProposalKernel<Self> + Clone + Sync;

    fn kernel(spec: KernelSpec) -> CliResult<Self::Kernel>;

    /// Proposal matched to the Gibbs width `sqrt(T / mu_max)`.
    fn scaled_kernel(t: f64, mu_max: f64) -> CliResult<Self::Kernel>;

    /// The configured initial point, or a seeded uniform draw.
    fn initial(&self, cfg: &RunConfig, seed: u64) -> CliResult<Self::Point>;
}

impl Space for Sphere {
    type Kernel = VonMisesFisher;

    fn kernel(spec: KernelSpec) -> CliResult<VonMisesFisher> {
        match spec {
            KernelSpec::VonMisesFisher { concentration } => Ok(VonMisesFisher::new(concentration)?),
            other => Err(CliError::Unsupported(format!("kernel {other:?} on a sphere"))),
        }
    }

    fn scaled_kernel(t: f64, mu_max: f64) -> CliResult<VonMisesFisher> {
        Ok(VonMisesFisher::new(mu_max / (3.0 * t))?)
    }

    fn initial(&self, cfg: &RunConfig, seed: u64) -> CliResult<Self::Point> {
        match &cfg.initial {
            Some(c) => Ok(self.point(c)?),
            None => Ok(self.random_point(&mut stream_rng(seed, 1))),
        }
    }
}

impl Space for Grassmann {
    type Kernel = UnitaryConjugation;

    fn kernel(spec: KernelSpec) -> CliResult<UnitaryConjugation> {
        match spec {
            KernelSpec::UnitaryConjugation { step_scale } => Ok(UnitaryConjugation::new(step_scale)?),
            other => Err(CliError::Unsupported(format!("kernel {other:?} on a Grassmannian"))),
        }
    }

    fn scaled_kernel(t: f64, mu_max: f64) -> CliResult<UnitaryConjugation> {
        Ok(UnitaryConjugation::new((t / mu_max).sqrt())?)
    }

    fn initial(&self, _cfg: &RunConfig, seed: u64) -> CliResult<Self::Point> {
        Ok(self.random_point(&mut stream_rng(seed, 1)))
    }
}

fn config_err(path: &str, message: impl Into<String>) -> CliError {
    CliError::Config { path: path.into(), message: message.into() }
}

fn real_matrix(path: &str, rows: &[Vec<f64>]) -> CliResult<DMatrix<f64>> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(config_err(path, "expected a non-empty square matrix"));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn complex_matrix(path: &str, re: &[Vec<f64>], im: Option<&Vec<Vec<f64>>>) -> CliResult<CMatrix> {
    let re = real_matrix(path, re)?;
    let im = match im {
        Some(rows) => {
            let m = real_matrix(&format!("{path}_imag"), rows)?;
            if m.shape() != re.shape() {
                return Err(config_err(&format!("{path}_imag"), "shape differs from the real part"));
            }
            m
        }
        None => DMatrix::zeros(re.nrows(), re.ncols()),
    };
    Ok(CMatrix::from_fn(re.nrows(), re.ncols(), |i, j| Complex::new(re[(i, j)], im[(i, j)])))
}

/// Objective on a sphere, plus the Legendre instance when the height profile can be tabulated.
pub fn sphere_objective(spec: &ObjectiveSpec, s: &Sphere, path: &str) -> CliResult<(Obj<Sphere>, Option<LegendreObjective>)> {
    match spec {
        ObjectiveSpec::Legendre9 {} => {
            if s.dim() != 2 {
                return Err(config_err(path, "legendre9 is defined on the 2-sphere"));
            }
            let u = LegendreObjective::new(s.clone(), 9)?;
            Ok((Box::new(u.clone()), Some(u)))
        }
        ObjectiveSpec::Transported { base, isometry, isometry_imag } => {
            if isometry_imag.is_some() {
                return Err(config_err(&format!("{path}.isometry_imag"), "sphere isometries are real"));
            }
            let (b, _) = sphere_objective(base, s, &format!("{path}.base"))?;
            let g = real_matrix(&format!("{path}.isometry"), isometry)?;
            Ok((Box::new(Transported::new(b, g)?), None))
        }
        ObjectiveSpec::GrassmannTrace { .. } => Err(config_err(path, "grassmann_trace needs a grassmann manifold")),
    }
}

pub fn grassmann_objective(spec: &ObjectiveSpec, g: &Grassmann, path: &str) -> CliResult<Obj<Grassmann>> {
    match spec {
        ObjectiveSpec::GrassmannTrace { diagonal, matrix, matrix_imag } => {
            let u = match (diagonal, matrix) {
                (Some(d), None) => GrassmannTrace::diagonal(d, g.k())?,
                (None, Some(m)) => GrassmannTrace::new(complex_matrix(&format!("{path}.matrix"), m, matrix_imag.as_ref())?, g.k())?,
                _ => return Err(config_err(path, "give exactly one of diagonal or matrix")),
            };
            if u.manifold().n() != g.n() {
                return Err(config_err(path, format!("C is {0}x{0} but the manifold has n = {1}", u.manifold().n(), g.n())));
            }
            Ok(Box::new(u))
        }
        ObjectiveSpec::Transported { base, isometry, isometry_imag } => {
            let b = grassmann_objective(base, g, &format!("{path}.base"))?;
            let w = complex_matrix(&format!("{path}.isometry"), isometry, isometry_imag.as_ref())?;
            Ok(Box::new(Transported::new(b, w)?))
        }
        ObjectiveSpec::Legendre9 {} => Err(config_err(path, "legendre9 needs a sphere manifold")),
    }
}

pub enum Problem {
    Sphere { m: Sphere, u: Obj<Sphere>, zonal: Option<LegendreObjective> },
    Grassmann { m: Grassmann, u: Obj<Grassmann> },
}

impl Problem {
    pub fn build(cfg: &RunConfig) -> CliResult<Problem> {
        match cfg.manifold {
            ManifoldSpec::Sphere { n } => {
                let m = Sphere::new(n)?;
                let (u, zonal) = sphere_objective(&cfg.objective, &m, "objective")?;
                Ok(Problem::Sphere { m, u, zonal })
            }
            ManifoldSpec::Grassmann { k, n } => {
                let m = Grassmann::new(k, n)?;
                let u = grassmann_objective(&cfg.objective, &m, "objective")?;
                Ok(Problem::Grassmann { m, u })
            }
        }
    }
}
