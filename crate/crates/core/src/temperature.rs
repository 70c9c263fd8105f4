//! Explicit temperature thresholds.
//!
//! Given the minimiser profile of `U` and the geometry of `M`, the functions
//! here evaluate the truncation and tail bounds, solve the scalar threshold
//! problems for `T_o` and `T_delta`, and evaluate the two checkable bounds:
//! the expected distance to `x*` and the Hessian lower bound on a ball.

use std::f64::consts::PI;

use log::info;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::manifold::{factorial, ManifoldDescriptor, PolarChart};
use crate::profile::MinimizerProfile;
use crate::special::{gamma, gauss_legendre};

/// `E|X|^k` for a standard normal `X`.
pub fn abs_gaussian_moment(k: f64) -> f64 {
    2f64.powf(k / 2.0) * gamma((k + 1.0) / 2.0) / PI.sqrt()
}

/// `B(1/2, n/2)`.
pub fn beta_half(n: usize) -> f64 {
    let n = n as f64;
    gamma(0.5) * gamma(n / 2.0) / gamma((n + 1.0) / 2.0)
}

/// Surface area of the unit sphere `S^{n-1}` in `R^n`.
pub fn unit_sphere_area(n: usize) -> f64 {
    let n = n as f64;
    2.0 * PI.powf(n / 2.0) / gamma(n / 2.0)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantsTable {
    pub n: usize,
    /// `a[k] = E|X|^k` for `k = 0..=n+1`.
    pub a: Vec<f64>,
    pub b_n: f64,
    pub omega_n: f64,
    pub c_n: f64,
    pub d_n: f64,
}

impl ConstantsTable {
    pub fn new(m: &ManifoldDescriptor) -> Self {
        let n = m.dim;
        let a: Vec<f64> = (0..=n + 1).map(|k| abs_gaussian_moment(k as f64)).collect();
        let b_n = beta_half(n);
        let omega_n = unit_sphere_area(n);
        let c_n = omega_n * a[n] / (m.diameter * m.volume);
        let d_n = (2.0 / PI).powi(n as i32 - 1) * b_n / (4.0 * m.diameter);
        ConstantsTable { n, a, b_n, omega_n, c_n, d_n }
    }

    pub fn a(&self, k: usize) -> f64 {
        self.a[k]
    }
}

fn check_temperature(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("temperature must be positive and finite, got {t}")))
    }
}

fn ln_truncation(t: f64, m: f64, u_gap: f64, mu_max: f64) -> f64 {
    0.5 * (2.0 / PI).ln() + 0.5 * m * (mu_max / t).ln() - u_gap / t
}

fn ln_gibbs_tail(t: f64, n: usize, u_delta: f64, mu_max: f64) -> f64 {
    let h = n as f64 / 2.0;
    (2.0 / PI).ln() + h * (PI / 8.0).ln() + h * (mu_max / t).ln() - u_delta / t
}

/// `sqrt(2/pi) (mu_max/T)^{m/2} exp(-U_rho/T)`.
pub fn f_truncation(t: f64, m: f64, profile: &MinimizerProfile) -> Result<f64> {
    check_temperature(t)?;
    Ok(ln_truncation(t, m, profile.u_rho, profile.mu_max).exp())
}

/// `(2/pi)(pi/8)^{n/2} (mu_max/T)^{n/2} exp(-U_delta/T)`, a bound on the Gibbs
/// density outside `B(x*, delta)`.
pub fn f_gibbs_tail(t: f64, delta: f64, u_delta: f64, profile: &MinimizerProfile, m: &ManifoldDescriptor) -> Result<f64> {
    check_temperature(t)?;
    check_delta(delta, m)?;
    Ok(ln_gibbs_tail(t, m.dim, u_delta, profile.mu_max).exp())
}

fn check_delta(delta: f64, m: &ManifoldDescriptor) -> Result<()> {
    if delta > 0.0 && delta < 0.5 * m.r_cx {
        Ok(())
    } else {
        Err(Error::invalid(format!("delta = {delta} must lie in (0, r_cx/2 = {})", 0.5 * m.r_cx)))
    }
}

/// Result of a threshold search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Threshold {
    /// Largest temperature found at which the inequality does not hold.
    pub value: f64,
    /// Smallest temperature found at which it holds, when a crossing exists.
    pub violated_at: Option<f64>,
    /// False when no crossing exists in the searched range; `value` is then the range top.
    pub crossed: bool,
}

const SCAN_START: f64 = 1e-12;
const SCAN_RATIO: f64 = 1.05;
const BISECT_MAX: usize = 200;
const BISECT_RTOL: f64 = 1e-12;

/// First crossing of `violates` scanning upward from tiny temperatures to `top`.
pub fn first_crossing(violates: impl Fn(f64) -> bool, top: f64) -> Result<Threshold> {
    if !(top > 0.0) {
        return Err(Error::invalid("threshold search range must be positive"));
    }
    let mut lo = SCAN_START.min(top);
    while violates(lo) {
        lo *= 0.1;
        if lo < 1e-300 {
            return Err(Error::invalid("inequality holds at every positive temperature"));
        }
    }
    let mut hi = lo;
    loop {
        if hi >= top {
            return Ok(Threshold { value: top, violated_at: None, crossed: false });
        }
        let next = (hi * SCAN_RATIO).min(top);
        if violates(next) {
            lo = hi;
            hi = next;
            break;
        }
        hi = next;
    }
    for _ in 0..BISECT_MAX {
        if hi - lo <= BISECT_RTOL * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if violates(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Threshold { value: lo, violated_at: Some(hi), crossed: true })
}

fn check_profile(p: &MinimizerProfile) -> Result<()> {
    if !(p.mu_min > 0.0 && p.mu_max >= p.mu_min && p.rho > 0.0 && p.u_rho > 0.0) {
        return Err(Error::invalid("profile needs 0 < mu_min <= mu_max, rho > 0 and U_rho > 0"));
    }
    Ok(())
}

/// Upper end of the range scanned for `T_o`.
fn outer_search_top(p: &MinimizerProfile) -> f64 {
    1e3 * p.u_rho
}

#[derive(Debug, Clone, Serialize)]
pub struct OuterThresholds {
    pub t_o1: Threshold,
    pub t_o2: Threshold,
    pub t_o: f64,
}

/// Violation predicates for the two `T_o` problems.
pub fn t_o1_violated(t: f64, p: &MinimizerProfile, c: &ConstantsTable) -> bool {
    let n = c.n as f64;
    let rhs = (2.0 - n) * p.rho.ln() + c.a(c.n - 1).ln();
    ln_truncation(t, n - 2.0, p.u_rho, p.mu_max) > rhs
}

pub fn t_o2_violated(t: f64, p: &MinimizerProfile, c: &ConstantsTable) -> bool {
    let n = c.n as f64;
    let rhs = 0.5 * n * (p.mu_max / p.mu_min).ln() + c.c_n.ln();
    ln_truncation(t, n + 1.0, p.u_rho, p.mu_max) > rhs
}

pub fn solve_t_o(p: &MinimizerProfile, c: &ConstantsTable) -> Result<OuterThresholds> {
    check_profile(p)?;
    if c.n < 1 {
        return Err(Error::invalid("dimension must be positive"));
    }
    let top = outer_search_top(p);
    let t_o1 = first_crossing(|t| t_o1_violated(t, p, c), top)?;
    let t_o2 = first_crossing(|t| t_o2_violated(t, p, c), top)?;
    for (name, th) in [("T_o1", &t_o1), ("T_o2", &t_o2)] {
        if !th.crossed {
            info!("{name}: no crossing below {top}; every temperature in range is admissible");
        }
    }
    Ok(OuterThresholds { t_o: t_o1.value.min(t_o2.value), t_o1, t_o2 })
}

/// `2 kappa delta cot(2 kappa delta)`.
pub fn ct_convexity(delta: f64, kappa: f64) -> Result<f64> {
    let x = 2.0 * kappa * delta;
    if !(x > 0.0 && x < PI / 2.0) {
        return Err(Error::invalid(format!("2 kappa delta = {x} outside (0, pi/2)")));
    }
    Ok(x / x.tan())
}

/// Measure of the orbit in the polar chart, fixed by matching the volume of
/// small geodesic balls: `vol B(r) ~ omega_dim r^dim / dim`.
pub fn orbit_measure(chart: &PolarChart, m: &ManifoldDescriptor) -> Result<f64> {
    let r = chart.rank;
    if r == 0 || r > 3 {
        return Err(Error::Unsupported(format!("polar charts of rank {r}")));
    }
    let dim = m.dim as f64;
    // Gaussian moment of the flat Jacobian over the positive cone
    let (nodes, weights) = gauss_legendre(16);
    let panels = 12;
    let width = 12.0 / panels as f64;
    let mut pts = Vec::with_capacity(panels * nodes.len());
    for p in 0..panels {
        let a = p as f64 * width;
        for (x, w) in nodes.iter().zip(&weights) {
            pts.push((a + 0.5 * width * (x + 1.0), 0.5 * width * w));
        }
    }
    let mut total = 0.0;
    let mut idx = vec![0usize; r];
    let mut a = vec![0.0; r];
    'outer: loop {
        let mut w = 1.0;
        let mut sq = 0.0;
        for (k, &i) in idx.iter().enumerate() {
            a[k] = pts[i].0;
            w *= pts[i].1;
            sq += a[k] * a[k];
        }
        total += w * chart.flat_jacobian(&a) * (-0.5 * sq).exp();
        #[allow(clippy::needless_range_loop)]
        for k in 0..r {
            idx[k] += 1;
            if idx[k] < pts.len() {
                continue 'outer;
            }
            idx[k] = 0;
        }
        break;
    }
    if chart.ordered {
        total /= factorial(r);
    }
    let radial = 2f64.powf(dim / 2.0 - 1.0) * gamma(dim / 2.0);
    let cross_section = total / radial;
    Ok(unit_sphere_area(m.dim) / cross_section)
}

/// The structural constant in the Hessian lower bound: orbit measure times
/// the Euclidean volume of the cell `D+`.
pub fn structural_constant_a_m(chart: &PolarChart, m: &ManifoldDescriptor) -> Result<f64> {
    Ok(orbit_measure(chart, m)? * chart.cell_volume())
}

/// Volume of `M` recomputed through the polar chart.
pub fn polar_volume(chart: &PolarChart, m: &ManifoldDescriptor) -> Result<f64> {
    let omega = orbit_measure(chart, m)?;
    let r = chart.rank;
    let (nodes, weights) = gauss_legendre(24);
    let panels = 4;
    let width = chart.side / panels as f64;
    let mut pts = Vec::new();
    for p in 0..panels {
        let a = p as f64 * width;
        for (x, w) in nodes.iter().zip(&weights) {
            pts.push((a + 0.5 * width * (x + 1.0), 0.5 * width * w));
        }
    }
    let mut total = 0.0;
    let mut idx = vec![0usize; r];
    let mut a = vec![0.0; r];
    'outer: loop {
        let mut w = 1.0;
        for (k, &i) in idx.iter().enumerate() {
            a[k] = pts[i].0;
            w *= pts[i].1;
        }
        total += w * chart.jacobian(&a);
        #[allow(clippy::needless_range_loop)]
        for k in 0..r {
            idx[k] += 1;
            if idx[k] < pts.len() {
                continue 'outer;
            }
            idx[k] = 0;
        }
        break;
    }
    if chart.ordered {
        total /= factorial(r);
    }
    Ok(omega * total)
}

/// Lower bound on the Doeblin constant `p_T` of the chain.
pub fn ergodicity_floor(t: f64, q_inf: f64, u_sup: f64, vol: f64) -> f64 {
    vol * q_inf * (-u_sup / t).exp()
}

/// Right-hand side of the bound on the expected distance `E d(x*, z)` under `P_T`.
pub fn wasserstein_bound(t: f64, p: &MinimizerProfile, c: &ConstantsTable) -> f64 {
    let n = c.n as f64;
    (2.0 * PI).sqrt()
        * (PI / 2.0).powf(n - 1.0)
        / c.b_n
        * (p.mu_max / p.mu_min).powf(n / 2.0)
        * (t / p.mu_min).sqrt()
}

/// Lower bound on the Hessian of `E_T` over `B(x*, delta)`.
pub fn hessian_lower_bound(
    t: f64,
    delta: f64,
    u_delta: f64,
    a_m: f64,
    p: &MinimizerProfile,
    m: &ManifoldDescriptor,
) -> Result<f64> {
    let f = f_gibbs_tail(t, delta, u_delta, p, m)?;
    let ct = ct_convexity(delta, m.kappa())?;
    Ok(ct * (1.0 - m.volume * f) - PI * a_m * f)
}

#[derive(Debug, Clone, Serialize)]
pub struct DeltaThresholds {
    pub t_delta1: Threshold,
    pub t_delta2: Threshold,
    pub epsilon: f64,
    pub t_delta: f64,
}

/// The algebraic inequality behind `T_delta1`.
pub fn t_delta1_violated(t: f64, delta: f64, p: &MinimizerProfile, c: &ConstantsTable) -> bool {
    let n = c.n as f64;
    (2.0 * PI).sqrt() * (t / p.mu_min).sqrt() > delta * delta * (p.mu_min / p.mu_max).powf(n / 2.0) * c.d_n
}

pub fn t_delta2_violated(t: f64, delta: f64, u_delta: f64, a_m: f64, p: &MinimizerProfile, m: &ManifoldDescriptor) -> bool {
    let ct = 2.0 * m.kappa() * delta / (2.0 * m.kappa() * delta).tan();
    let rhs = ct / (ct * m.volume + PI * a_m);
    ln_gibbs_tail(t, m.dim, u_delta, p.mu_max) > rhs.ln()
}

/// `epsilon = None` selects `1e-3 * min(T_delta1, T_delta2)`.
#[allow(clippy::too_many_arguments)]
pub fn solve_t_delta(
    delta: f64,
    u_delta: f64,
    epsilon: Option<f64>,
    t_o: f64,
    a_m: f64,
    p: &MinimizerProfile,
    m: &ManifoldDescriptor,
    c: &ConstantsTable,
) -> Result<DeltaThresholds> {
    check_profile(p)?;
    check_delta(delta, m)?;
    check_temperature(t_o)?;
    if !(u_delta > 0.0) {
        return Err(Error::invalid("U_delta must be positive"));
    }
    let n = c.n as f64;
    let root = delta * delta * (p.mu_min / p.mu_max).powf(n / 2.0) * c.d_n;
    let closed = p.mu_min * root * root / (2.0 * PI);
    let t_delta1 = if closed < t_o {
        Threshold { value: closed, violated_at: Some(closed), crossed: true }
    } else {
        Threshold { value: t_o, violated_at: None, crossed: false }
    };
    let t_delta2 = first_crossing(|t| t_delta2_violated(t, delta, u_delta, a_m, p, m), t_o)?;
    let floor = t_delta1.value.min(t_delta2.value);
    let epsilon = epsilon.unwrap_or(1e-3 * floor);
    if !(epsilon > 0.0 && epsilon < floor) {
        return Err(Error::invalid(format!("epsilon = {epsilon} must lie in (0, {floor})")));
    }
    Ok(DeltaThresholds { t_delta1, t_delta2, epsilon, t_delta: floor - epsilon })
}

/// All thresholds together with the inputs they were computed from.
#[derive(Debug, Clone, Serialize)]
pub struct TemperatureReport {
    pub t_o1: f64,
    pub t_o1_crossed: bool,
    pub t_o2: f64,
    pub t_o2_crossed: bool,
    pub t_o: f64,
    pub t_delta1: f64,
    pub t_delta2: f64,
    pub t_delta2_crossed: bool,
    pub t_delta: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub u_delta: f64,
    pub ct_2delta: f64,
    pub a_m: f64,
    pub constants: ConstantsTable,
    pub profile: MinimizerProfile,
    pub manifold: ManifoldDescriptor,
}

pub fn temperature_report(
    p: &MinimizerProfile,
    m: &ManifoldDescriptor,
    chart: &PolarChart,
    delta: f64,
    u_delta: f64,
    epsilon: Option<f64>,
) -> Result<TemperatureReport> {
    let c = ConstantsTable::new(m);
    let outer = solve_t_o(p, &c)?;
    let a_m = structural_constant_a_m(chart, m)?;
    let inner = solve_t_delta(delta, u_delta, epsilon, outer.t_o, a_m, p, m, &c)?;
    Ok(TemperatureReport {
        t_o1: outer.t_o1.value,
        t_o1_crossed: outer.t_o1.crossed,
        t_o2: outer.t_o2.value,
        t_o2_crossed: outer.t_o2.crossed,
        t_o: outer.t_o,
        t_delta1: inner.t_delta1.value,
        t_delta2: inner.t_delta2.value,
        t_delta2_crossed: inner.t_delta2.crossed,
        t_delta: inner.t_delta,
        epsilon: inner.epsilon,
        delta,
        u_delta,
        ct_2delta: ct_convexity(delta, m.kappa())?,
        a_m,
        constants: c,
        profile: p.clone(),
        manifold: m.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{Grassmann, Manifold, Sphere};
    use crate::special::integrate;
    use approx::assert_relative_eq;

    fn toy_profile() -> MinimizerProfile {
        MinimizerProfile::from_parts(2, -1.0, 42.75, 47.25, 0.05, 0.05).unwrap()
    }

    #[test]
    fn moments_and_beta() {
        assert_eq!(abs_gaussian_moment(0.0), 1.0);
        assert_relative_eq!(abs_gaussian_moment(1.0), (2.0 / PI).sqrt(), max_relative = 1e-12);
        assert_relative_eq!(abs_gaussian_moment(2.0), 1.0, max_relative = 1e-12);
        assert_relative_eq!(abs_gaussian_moment(4.0), 3.0, max_relative = 1e-12);
        assert_relative_eq!(beta_half(1), PI, max_relative = 1e-12);
        assert_relative_eq!(beta_half(2), 2.0, max_relative = 1e-12);
        for n in 1..=10 {
            let ratio = abs_gaussian_moment(n as f64) / abs_gaussian_moment(n as f64 - 1.0);
            assert_relative_eq!(ratio, (2.0 * PI).sqrt() / beta_half(n), max_relative = 1e-10);
        }
    }

    #[test]
    fn sphere_areas() {
        assert_relative_eq!(unit_sphere_area(2), 2.0 * PI, max_relative = 1e-13);
        assert_relative_eq!(unit_sphere_area(3), 4.0 * PI, max_relative = 1e-13);
        assert_relative_eq!(unit_sphere_area(4), 2.0 * PI * PI, max_relative = 1e-13);
    }

    #[test]
    fn table_matches_formulas() {
        let s = Sphere::new(2).unwrap();
        let c = ConstantsTable::new(s.descriptor());
        assert_eq!(c.a.len(), 4);
        assert_relative_eq!(c.c_n, 2.0 * PI * 1.0 / (PI * 4.0 * PI), max_relative = 1e-13);
        assert_relative_eq!(c.d_n, (2.0 / PI) * 2.0 / (4.0 * PI), max_relative = 1e-13);
    }

    #[test]
    fn truncation_examples() {
        let p = toy_profile();
        assert!(f_truncation(p.u_rho / 1000.0, 3.0, &p).unwrap() < 1e-300);
        let t = 0.01;
        assert_relative_eq!(
            f_truncation(t, 0.0, &p).unwrap(),
            (2.0 / PI).sqrt() * (-p.u_rho / t).exp(),
            max_relative = 1e-14
        );
        assert!(f_truncation(0.0, 1.0, &p).is_err());
        // increasing below the maximiser 2 U_rho / m
        let grid: Vec<f64> = (1..100).map(|i| i as f64 * 2.0 * p.u_rho / 3.0 / 100.0).collect();
        for w in grid.windows(2) {
            assert!(f_truncation(w[0], 3.0, &p).unwrap() < f_truncation(w[1], 3.0, &p).unwrap());
        }
    }

    #[test]
    fn gibbs_tail_substitution() {
        let s = Sphere::new(2).unwrap();
        let p = MinimizerProfile::from_parts(2, 0.0, 1.0, 2.0, 0.1, 0.1).unwrap();
        let v = f_gibbs_tail(1.0, 0.3, 1.0, &p, s.descriptor()).unwrap();
        assert_relative_eq!(v, (2.0 / PI) * (PI / 8.0) * 2.0 * (-1.0f64).exp(), max_relative = 1e-14);
        assert!(f_gibbs_tail(1.0 / 500.0, 0.3, 1.0, &p, s.descriptor()).unwrap() < 1e-200);
        assert!(f_gibbs_tail(1.0, 0.8, 1.0, &p, s.descriptor()).is_err());
    }

    #[test]
    fn ct_values() {
        assert_relative_eq!(ct_convexity(PI / 8.0, 1.0).unwrap(), PI / 4.0, max_relative = 1e-14);
        assert!((ct_convexity(0.5e-6, 1.0).unwrap() - 1.0).abs() < 1e-9);
        assert!(ct_convexity(PI / 4.0, 1.0).is_err());
        let mut last = 1.0;
        for i in 1..100 {
            let v = ct_convexity(i as f64 * PI / 4.0 / 100.0, 1.0).unwrap();
            assert!(v < last && v > 0.0);
            last = v;
        }
    }

    #[test]
    fn structural_constant_on_spheres() {
        let s2 = Sphere::new(2).unwrap();
        assert_relative_eq!(structural_constant_a_m(&s2.polar_chart(), s2.descriptor()).unwrap(), 2.0 * PI * PI, max_relative = 1e-9);
        let s3 = Sphere::new(3).unwrap();
        assert_relative_eq!(structural_constant_a_m(&s3.polar_chart(), s3.descriptor()).unwrap(), 4.0 * PI * PI, max_relative = 1e-9);
        // chart check: omega_2 * int_0^pi sin r dr = 4 pi
        let chart = integrate(|r| r.sin(), 0.0, PI, 8, 16) * 2.0 * PI;
        assert_relative_eq!(chart, 4.0 * PI, max_relative = 1e-12);
    }

    #[test]
    fn grassmann_polar_volume_matches_closed_form() {
        for (k, n) in [(1, 2), (1, 3), (2, 4), (2, 5), (3, 6)] {
            let g = Grassmann::new(k, n).unwrap();
            let v = polar_volume(&g.polar_chart(), g.descriptor()).unwrap();
            assert_relative_eq!(v, g.descriptor().volume, max_relative = 1e-3);
            assert!(structural_constant_a_m(&g.polar_chart(), g.descriptor()).unwrap() > 0.0);
        }
    }

    #[test]
    fn ergodicity_floor_limits() {
        assert_eq!(ergodicity_floor(0.1, 0.0, 1.0, 4.0 * PI), 0.0);
        assert_relative_eq!(ergodicity_floor(1e12, 0.5, 1.0, 2.0), 1.0, max_relative = 1e-9);
        let a = ergodicity_floor(0.2, 1.0, 1.0, 1.0);
        let b = ergodicity_floor(0.1, 1.0, 1.0, 1.0);
        assert!(b <= a * a * (1.0 + 1e-12));
    }

    #[test]
    fn t_delta1_closed_form_matches_bisection() {
        let s = Sphere::new(2).unwrap();
        let c = ConstantsTable::new(s.descriptor());
        let p = toy_profile();
        let d = solve_t_delta(0.3, 0.5, None, 1.0, 2.0 * PI * PI, &p, s.descriptor(), &c).unwrap();
        let oracle = first_crossing(|t| t_delta1_violated(t, 0.3, &p, &c), 1.0).unwrap();
        assert_relative_eq!(d.t_delta1.value, oracle.value, max_relative = 1e-12);
        let wider = solve_t_delta(0.35, 0.5, None, 1.0, 2.0 * PI * PI, &p, s.descriptor(), &c).unwrap();
        assert!(wider.t_delta1.value >= d.t_delta1.value);
        assert!(solve_t_delta(0.3, 0.5, Some(1.0), 1.0, 2.0 * PI * PI, &p, s.descriptor(), &c).is_err());
    }

    #[test]
    fn thresholds_are_monotone_in_the_gap() {
        let s = Sphere::new(3).unwrap();
        let c = ConstantsTable::new(s.descriptor());
        let p = MinimizerProfile::from_parts(3, 0.0, 10.0, 12.0, 0.5, 0.05).unwrap();
        let mut q = p.clone();
        q.u_rho *= 2.0;
        let a = solve_t_o(&p, &c).unwrap();
        let b = solve_t_o(&q, &c).unwrap();
        assert!(a.t_o1.crossed && a.t_o2.crossed);
        assert!(b.t_o1.value > a.t_o1.value && b.t_o2.value > a.t_o2.value);
    }

    #[test]
    fn m_zero_truncation_never_crosses() {
        let s = Sphere::new(2).unwrap();
        let c = ConstantsTable::new(s.descriptor());
        let o = solve_t_o(&toy_profile(), &c).unwrap();
        assert!(!o.t_o1.crossed);
        assert!(o.t_o2.crossed);
        assert_eq!(o.t_o, o.t_o2.value);
    }
}
