//! Gamma and Beta functions, Legendre polynomials and Gauss-Legendre quadrature.

use std::f64::consts::PI;

use crate::error::{Error, Result};

// Lanczos approximation, g = 7, nine terms. Relative accuracy is close to
// machine precision for positive arguments.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum(x: f64) -> f64 {
    // x is the shifted argument (z - 1)
    let mut acc = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    acc
}

/// Gamma function for real arguments (poles at non-positive integers return NaN).
pub fn gamma(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    if z <= 0.0 && z.fract() == 0.0 {
        return f64::NAN;
    }
    // Exact on small positive integers, which the constants table hits often.
    if z.fract() == 0.0 && z <= 171.0 {
        let mut acc = 1.0;
        let mut k = 2.0;
        while k < z {
            acc *= k;
            k += 1.0;
        }
        return acc;
    }
    if z < 0.5 {
        // reflection
        return PI / ((PI * z).sin() * gamma(1.0 - z));
    }
    let x = z - 1.0;
    let t = x + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * lanczos_sum(x)
}

/// Natural logarithm of |Gamma(z)| for z > 0.
pub fn ln_gamma(z: f64) -> f64 {
    if z < 0.5 {
        return (PI / (PI * z).sin().abs()).ln() - ln_gamma(1.0 - z);
    }
    let x = z - 1.0;
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + lanczos_sum(x).ln()
}

/// Beta function B(a, b) for a, b > 0.
pub fn beta(a: f64, b: f64) -> f64 {
    if a + b < 170.0 {
        gamma(a) * gamma(b) / gamma(a + b)
    } else {
        (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp()
    }
}

/// Legendre polynomial P_n(t) on [-1, 1] by the three-term recurrence
/// (k+1) P_{k+1} = (2k+1) t P_k - k P_{k-1}.
pub fn legendre_p(n: usize, t: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&t) {
        return Err(Error::invalid(format!("Legendre argument {t} outside [-1, 1]")));
    }
    Ok(legendre_with_derivative(n, t).0)
}

/// P_n(t) and P_n'(t) without range checks.
pub(crate) fn legendre_with_derivative(n: usize, t: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p_prev = 1.0;
    let mut p = t;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * t * p - kf * p_prev) / (kf + 1.0);
        p_prev = p;
        p = next;
    }
    let nf = n as f64;
    let dp = if (t * t - 1.0).abs() < 1e-300 {
        // P_n'(+-1) = (+-1)^{n+1} n(n+1)/2
        let s = if t > 0.0 || n % 2 == 1 { 1.0 } else { -1.0 };
        s * nf * (nf + 1.0) / 2.0
    } else {
        nf * (t * p - p_prev) / (t * t - 1.0)
    };
    (p, dp)
}

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "quadrature needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton.
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite Gauss-Legendre integral of `f` over [a, b] using `panels` panels of `order` nodes.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        let mut acc = 0.0;
        for (xi, wi) in x.iter().zip(&w) {
            acc += wi * f(mid + 0.5 * h * xi);
        }
        total += 0.5 * h * acc;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gamma_known_values() {
        assert_eq!(gamma(1.0), 1.0);
        assert_eq!(gamma(5.0), 24.0);
        assert_relative_eq!(gamma(0.5), PI.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(gamma(1.5), 0.5 * PI.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(gamma(4.5), 11.631_728_396_567_448, max_relative = 1e-14);
        assert_relative_eq!(gamma(-0.5), -2.0 * PI.sqrt(), max_relative = 1e-13);
        assert!(gamma(0.0).is_nan());
        assert!(gamma(-2.0).is_nan());
    }

    #[test]
    fn ln_gamma_matches_gamma() {
        for &z in &[0.3, 0.5, 1.7, 3.2, 10.5, 40.25] {
            assert_relative_eq!(ln_gamma(z), gamma(z).ln(), max_relative = 1e-13, epsilon = 1e-14);
        }
    }

    #[test]
    fn beta_symmetry_and_values() {
        assert_relative_eq!(beta(0.5, 0.5), PI, max_relative = 1e-14);
        assert_relative_eq!(beta(0.5, 1.0), 2.0, max_relative = 1e-14);
        assert_relative_eq!(beta(2.5, 1.25), beta(1.25, 2.5), max_relative = 1e-15);
    }

    #[test]
    fn legendre_endpoints_and_parity() {
        assert_eq!(legendre_p(9, 1.0).unwrap(), 1.0);
        assert_eq!(legendre_p(9, 0.0).unwrap(), 0.0);
        assert_eq!(legendre_p(9, -1.0).unwrap(), -1.0);
        assert_eq!(legendre_p(0, 0.3).unwrap(), 1.0);
        assert!(legendre_p(9, 1.0 + 1e-12).is_err());
        // P_2(t) = (3t^2 - 1)/2
        assert_relative_eq!(legendre_p(2, 0.4).unwrap(), (3.0 * 0.16 - 1.0) / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn legendre_derivative_at_one() {
        let (_, d) = legendre_with_derivative(9, 1.0);
        assert_eq!(d, 45.0);
        let (_, d) = legendre_with_derivative(9, -1.0);
        assert_eq!(d, 45.0);
        let (_, d) = legendre_with_derivative(4, -1.0);
        assert_eq!(d, -10.0);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(7);
        // exact for degree <= 13
        let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(12)).sum();
        assert_relative_eq!(integral, 2.0 / 13.0, max_relative = 1e-14);
        let total: f64 = w.iter().sum();
        assert_relative_eq!(total, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn composite_rule_on_smooth_integrand() {
        let v = integrate(|x| x.sin(), 0.0, PI, 8, 16);
        assert_relative_eq!(v, 2.0, max_relative = 1e-14);
    }
}
