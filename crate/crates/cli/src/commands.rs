//! The four verbs. Each writes its artifacts into the output directory and
//! returns the process exit code.

use std::path::Path;
use std::time::Instant;

use baryopt::annealing::{run_annealing, AnnealingSchedule};
use baryopt::barycentre::{wasserstein_to_dirac, TrajectoryCsvWriter, TrajectoryRow};
use baryopt::experiment::{optimize, OptimizeConfig};
use baryopt::objective::{LegendreObjective, Objective};
use baryopt::profile::{estimate_minimizer_profile_with, estimate_u_delta, ProfileOptions};
use baryopt::sampler::ProposalKernel;
use baryopt::stats::FunctionalEstimate;
use baryopt::temperature::{temperature_report, wasserstein_bound, ConstantsTable, TemperatureReport};
use baryopt::verify::{check_convexity, check_stationarity, gibbs_samples, loglog_slope, ConvexitySetup, SIGMA_MULTIPLE};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Mode, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{ensure_dir, write_atomic, write_json};
use crate::problem::{Obj, Space};

/// Exit code when every artifact was written but a checked inequality failed.
pub const EXIT_CHECK_FAILED: i32 = 2;

fn known_minimizer<S: Space>(u: &Obj<S>) -> CliResult<S::Point> {
    u.known_minimizer()
        .ok_or_else(|| CliError::Unsupported("this command needs an objective with a known minimiser".into()))
}

/// Minimiser profile and the full threshold report.
pub fn oracle_report<S: Space>(m: &S, u: &Obj<S>, cfg: &RunConfig) -> CliResult<TemperatureReport> {
    let x_star = known_minimizer(u)?;
    let opts = ProfileOptions {
        pad: cfg.profile.pad,
        search_samples: cfg.profile.search_samples,
        sandwich_samples: cfg.profile.sandwich_samples,
        seed: cfg.profile.seed,
        ..ProfileOptions::default()
    };
    let profile = estimate_minimizer_profile_with(u, &x_star, &opts)?;
    let u_delta = estimate_u_delta(u, &x_star, cfg.delta(), &opts)?;
    Ok(temperature_report(&profile, m.descriptor(), &m.polar_chart(), cfg.delta(), u_delta, cfg.epsilon)?)
}

/// Temperature for the optimiser: explicit, or `T_delta` in oracle mode.
fn run_temperature<S: Space>(m: &S, u: &Obj<S>, cfg: &RunConfig) -> CliResult<(f64, Option<TemperatureReport>)> {
    match cfg.mode {
        Mode::Blind => Ok((cfg.temperature.expect("validated"), None)),
        Mode::Oracle => {
            let report = oracle_report(m, u, cfg)?;
            Ok((cfg.temperature.unwrap_or(report.t_delta), Some(report)))
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub seed: u64,
    pub initial: Vec<f64>,
    pub x_hat: Vec<f64>,
    pub value: f64,
    pub distance_to_minimizer: Option<f64>,
    pub acceptance_rate: f64,
    pub samples_used: u64,
    pub runtime_seconds: f64,
    pub trajectory: String,
}

#[allow(clippy::too_many_arguments)]
fn barycentre_run<S: Space>(
    m: &S,
    u: &Obj<S>,
    kernel: &S::Kernel,
    cfg: &RunConfig,
    t: f64,
    seed: u64,
    file: String,
    out: &Path,
) -> CliResult<RunSummary> {
    let start = Instant::now();
    let x0 = m.initial(cfg, seed)?;
    let star = u.known_minimizer();
    let mut writer = TrajectoryCsvWriter::new(Vec::new(), &m.coord_labels())?;
    let mut failure = None;
    let run = OptimizeConfig { temperature: t, steps: cfg.steps, burn_in: cfg.burn_in(), seed };
    let outcome = optimize(x0.clone(), u, kernel, &run, |n, x| {
        if failure.is_some() {
            return;
        }
        let row = TrajectoryRow {
            n,
            coords: m.coords(x),
            distance_to_minimizer: star.as_ref().map(|s| m.distance(x, s)),
            u: u.eval(x),
        };
        if let Err(e) = writer.write(&row) {
            failure = Some(e);
        }
    })?;
    if let Some(e) = failure {
        return Err(e.into());
    }
    write_atomic(out, &file, &writer.finish()?)?;
    Ok(RunSummary {
        seed,
        initial: m.coords(&x0),
        x_hat: m.coords(&outcome.x_hat),
        value: outcome.value,
        distance_to_minimizer: outcome.distance_to_minimizer,
        acceptance_rate: outcome.acceptance_rate,
        samples_used: outcome.samples_used,
        runtime_seconds: start.elapsed().as_secs_f64(),
        trajectory: file,
    })
}

/// `U` against the height `x_3` on a uniform grid.
fn write_height_profile(out: &Path, zonal: &LegendreObjective) -> CliResult<String> {
    let name = "objective_profile.csv".to_string();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["x3", "u"])?;
    for i in 0..=2000 {
        let h = -1.0 + i as f64 / 1000.0;
        w.write_record([h.to_string(), zonal.profile(h).to_string()])?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io { path: name.clone(), source: e.into_error() })?;
    write_atomic(out, &name, &bytes)?;
    Ok(name)
}

#[derive(Serialize)]
struct OptimizeReport<'a> {
    command: &'static str,
    config: &'a RunConfig,
    temperature: f64,
    temperature_report: Option<TemperatureReport>,
    runs: Vec<RunSummary>,
    objective_profile: Option<String>,
}

pub fn cmd_optimize<S: Space>(m: &S, u: &Obj<S>, zonal: Option<&LegendreObjective>, cfg: &RunConfig, out: &Path) -> CliResult<i32> {
    ensure_dir(out)?;
    let kernel = S::kernel(cfg.kernel.expect("resolved"))?;
    let (t, report) = run_temperature(m, u, cfg)?;
    let runs = cfg
        .seeds
        .par_iter()
        .map(|&seed| barycentre_run(m, u, &kernel, cfg, t, seed, format!("trajectory_seed{seed}.csv"), out))
        .collect::<CliResult<Vec<_>>>()?;
    let objective_profile = zonal.map(|z| write_height_profile(out, z)).transpose()?;
    let report = OptimizeReport { command: "optimize", config: cfg, temperature: t, temperature_report: report, runs, objective_profile };
    write_json(out, "summary.json", &report)?;
    Ok(0)
}

#[derive(Serialize)]
struct TemperaturesOutput<'a> {
    command: &'static str,
    config: &'a RunConfig,
    report: TemperatureReport,
}

pub fn cmd_temperatures<S: Space>(m: &S, u: &Obj<S>, cfg: &RunConfig, out: &Path) -> CliResult<i32> {
    ensure_dir(out)?;
    let report = oracle_report(m, u, cfg)?;
    write_json(out, "temperatures.json", &TemperaturesOutput { command: "temperatures", config: cfg, report })?;
    Ok(0)
}

/// One row of the bound-verification table.
#[derive(Debug, Serialize)]
pub struct VerifyRow {
    pub temperature: f64,
    pub wasserstein: f64,
    pub wasserstein_std_error: f64,
    pub wasserstein_bound: f64,
    /// The concentration bound is claimed for `T <= T_o`.
    pub wasserstein_applies: bool,
    pub wasserstein_pass: bool,
    pub hessian_min: f64,
    pub hessian_min_std_error: f64,
    pub hessian_bound: f64,
    /// The convexity bound is claimed for `T <= T_delta`.
    pub hessian_applies: bool,
    pub hessian_pass: bool,
    pub hessian_probes: usize,
    pub gradient_norm: f64,
    pub gradient_std_error: f64,
    pub stationarity_pass: bool,
    pub kernel: String,
}

#[derive(Serialize)]
struct VerifyOutput<'a> {
    command: &'static str,
    config: &'a RunConfig,
    report: &'a TemperatureReport,
    sqrt_law_slope: Option<f64>,
    sigma_multiple: f64,
    all_applicable_pass: bool,
    table: String,
    rows: &'a [VerifyRow],
}

pub fn cmd_verify_bounds<S: Space>(m: &S, u: &Obj<S>, cfg: &RunConfig, out: &Path) -> CliResult<i32> {
    ensure_dir(out)?;
    let x_star = known_minimizer(u)?;
    let report = oracle_report(m, u, cfg)?;
    let profile = &report.profile;
    let consts = ConstantsTable::new(m.descriptor());
    let v = &cfg.verify;
    let temps: Vec<f64> = match &v.temperatures {
        Some(ts) => ts.clone(),
        None => v.temperature_factors.iter().map(|f| f * report.t_o).collect(),
    };
    let configured = S::kernel(cfg.kernel.expect("resolved"))?;
    let mut rows = Vec::with_capacity(temps.len());
    for (i, &t) in temps.iter().enumerate() {
        let kernel = if v.scale_kernel { S::scaled_kernel(t, profile.mu_max)? } else { configured.clone() };
        let seed = cfg.seeds[0].wrapping_add(i as u64);
        let zs = gibbs_samples(&x_star, u, t, &kernel, v.samples, seed)?;
        let w: FunctionalEstimate = wasserstein_to_dirac(m, &x_star, &zs)?;
        let w_bound = wasserstein_bound(t, profile, &consts);
        let thinned: Vec<S::Point> = zs.iter().step_by(v.thinning).cloned().collect();
        let setup = ConvexitySetup {
            temperature: t,
            delta: report.delta,
            u_delta: report.u_delta,
            a_m: report.a_m,
            points: v.probe_points,
            directions: v.directions,
            seed,
            fd_step: v.fd_step,
        };
        let probes = check_convexity(m, &x_star, &thinned, profile, &setup)?;
        let worst = probes
            .iter()
            .min_by(|a, b| a.estimate.value.total_cmp(&b.estimate.value))
            .expect("at least one probe");
        let st = check_stationarity(m, &x_star, &zs)?;
        rows.push(VerifyRow {
            temperature: t,
            wasserstein: w.value,
            wasserstein_std_error: w.std_error,
            wasserstein_bound: w_bound,
            wasserstein_applies: t <= report.t_o,
            wasserstein_pass: w.value <= w_bound + SIGMA_MULTIPLE * w.std_error,
            hessian_min: worst.estimate.value,
            hessian_min_std_error: worst.estimate.std_error,
            hessian_bound: worst.bound,
            hessian_applies: t <= report.t_delta,
            hessian_pass: probes.iter().all(|p| p.pass),
            hessian_probes: probes.len(),
            gradient_norm: st.gradient_norm,
            gradient_std_error: st.std_error,
            stationarity_pass: st.pass,
            kernel: serde_json::to_string(&kernel.describe())?,
        });
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &rows {
        w.serialize(r)?;
    }
    let table = "verify_bounds.csv".to_string();
    let bytes = w.into_inner().map_err(|e| CliError::Io { path: table.clone(), source: e.into_error() })?;
    write_atomic(out, &table, &bytes)?;
    let sqrt_law_slope = (rows.len() >= 2).then(|| {
        let t: Vec<f64> = rows.iter().map(|r| r.temperature).collect();
        let e: Vec<f64> = rows.iter().map(|r| r.wasserstein).collect();
        loglog_slope(&t, &e)
    });
    let all_applicable_pass = rows.iter().all(|r| {
        (!r.wasserstein_applies || r.wasserstein_pass) && (!r.hessian_applies || (r.hessian_pass && r.stationarity_pass))
    });
    let output = VerifyOutput {
        command: "verify-bounds",
        config: cfg,
        report: &report,
        sqrt_law_slope,
        sigma_multiple: SIGMA_MULTIPLE,
        all_applicable_pass,
        table,
        rows: &rows,
    };
    write_json(out, "verify_bounds.json", &output)?;
    Ok(if all_applicable_pass { 0 } else { EXIT_CHECK_FAILED })
}

#[derive(Debug, Serialize)]
pub struct MethodSummary {
    pub method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule: Option<AnnealingSchedule>,
    pub success_rate: f64,
    pub median_final_distance: f64,
    pub final_distances: Vec<f64>,
    /// Distance of the best point visited (annealing only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_distances: Option<Vec<f64>>,
    pub trajectories: Vec<String>,
}

#[derive(Serialize)]
struct CompareOutput<'a> {
    command: &'static str,
    config: &'a RunConfig,
    temperature: f64,
    temperature_report: Option<TemperatureReport>,
    success_radius: f64,
    methods: Vec<MethodSummary>,
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

fn schedule_name(s: &AnnealingSchedule) -> &'static str {
    match s {
        AnnealingSchedule::Geometric { .. } => "geometric",
        AnnealingSchedule::Logarithmic { .. } => "logarithmic",
        AnnealingSchedule::Constant { .. } => "constant",
    }
}

struct AnnealingRun {
    final_distance: f64,
    best_distance: f64,
}

#[allow(clippy::too_many_arguments)]
fn annealing_run<S: Space>(
    m: &S,
    u: &Obj<S>,
    kernel: &S::Kernel,
    cfg: &RunConfig,
    schedule: &AnnealingSchedule,
    seed: u64,
    star: &S::Point,
    file: &str,
    out: &Path,
) -> CliResult<AnnealingRun> {
    let x0 = m.initial(cfg, seed)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["n".to_string(), "temperature".to_string()];
    header.extend(m.coord_labels());
    header.extend(["dist_to_min", "u", "best_u", "accepted"].map(String::from));
    w.write_record(&header)?;
    let mut failure = None;
    let outcome = run_annealing(x0, u, schedule, kernel, cfg.steps, seed, |z, row| {
        let mut rec = vec![row.n.to_string(), row.temperature.to_string()];
        rec.extend(m.coords(z).iter().map(|c| c.to_string()));
        rec.push(m.distance(z, star).to_string());
        rec.push(row.value.to_string());
        rec.push(row.best_value.to_string());
        rec.push(u8::from(row.accepted).to_string());
        if let Err(e) = w.write_record(&rec) {
            failure.get_or_insert(e);
        }
    })?;
    if let Some(e) = failure {
        return Err(e.into());
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io { path: file.to_string(), source: e.into_error() })?;
    write_atomic(out, file, &bytes)?;
    Ok(AnnealingRun {
        final_distance: m.distance(&outcome.final_point, star),
        best_distance: m.distance(&outcome.best_point, star),
    })
}

pub fn cmd_compare<S: Space>(m: &S, u: &Obj<S>, cfg: &RunConfig, out: &Path) -> CliResult<i32> {
    ensure_dir(out)?;
    if cfg.steps == 0 {
        return Err(CliError::Config { path: "steps".into(), message: "compare needs at least one step".into() });
    }
    let star = known_minimizer(u)?;
    let kernel = S::kernel(cfg.kernel.expect("resolved"))?;
    let (t, report) = run_temperature(m, u, cfg)?;
    let r = cfg.success_radius;

    let bary = cfg
        .seeds
        .par_iter()
        .map(|&seed| barycentre_run(m, u, &kernel, cfg, t, seed, format!("barycentre_seed{seed}.csv"), out))
        .collect::<CliResult<Vec<_>>>()?;
    let final_distances: Vec<f64> = bary.iter().map(|s| s.distance_to_minimizer.expect("known minimiser")).collect();
    let mut methods = vec![MethodSummary {
        method: "barycentre".into(),
        schedule: None,
        success_rate: final_distances.iter().filter(|&&d| d < r).count() as f64 / final_distances.len() as f64,
        median_final_distance: median(&final_distances),
        final_distances,
        best_distances: None,
        trajectories: bary.into_iter().map(|s| s.trajectory).collect(),
    }];

    for (j, schedule) in cfg.schedules.iter().enumerate() {
        let name = format!("annealing{j}_{}", schedule_name(schedule));
        let files: Vec<String> = cfg.seeds.iter().map(|s| format!("{name}_seed{s}.csv")).collect();
        let runs = cfg
            .seeds
            .par_iter()
            .zip(files.par_iter())
            .map(|(&seed, file)| annealing_run(m, u, &kernel, cfg, schedule, seed, &star, file, out))
            .collect::<CliResult<Vec<_>>>()?;
        let final_distances: Vec<f64> = runs.iter().map(|a| a.final_distance).collect();
        methods.push(MethodSummary {
            method: name,
            schedule: Some(*schedule),
            success_rate: final_distances.iter().filter(|&&d| d < r).count() as f64 / final_distances.len() as f64,
            median_final_distance: median(&final_distances),
            final_distances,
            best_distances: Some(runs.iter().map(|a| a.best_distance).collect()),
            trajectories: files,
        });
    }
    let output = CompareOutput { command: "compare", config: cfg, temperature: t, temperature_report: report, success_radius: r, methods };
    write_json(out, "compare.json", &output)?;
    Ok(0)
}
