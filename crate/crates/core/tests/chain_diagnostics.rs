//! Statistical diagnostics of the Metropolis chain and the concentration estimate.

use baryopt::barycentre::wasserstein_to_dirac;
use baryopt::manifold::Manifold;
use baryopt::objective::{objective_legendre_sphere, objective_transported, plane_rotation, Objective};
use baryopt::rng::stream_rng;
use baryopt::sampler::VonMisesFisher;
use baryopt::stats::jackknife_mean;
use baryopt::verify::gibbs_samples;

#[test]
fn mean_objective_matches_long_reference_chain() {
    let u = objective_legendre_sphere();
    let x0 = u.manifold().point(&[0.0, 0.0, -1.0]).unwrap();
    let k = VonMisesFisher::new(5.0).unwrap();
    let short = gibbs_samples(&x0, &u, 0.2, &k, 100_000, 1).unwrap();
    let long = gibbs_samples(&x0, &u, 0.2, &k, 1_000_000, 2).unwrap();
    let a = jackknife_mean(&short.iter().map(|z| u.eval(z)).collect::<Vec<_>>());
    let b = jackknife_mean(&long.iter().map(|z| u.eval(z)).collect::<Vec<_>>());
    let se = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
    assert!((a.value - b.value).abs() < 2.0 * se, "{} vs {} (se {se})", a.value, b.value);
}

fn height_histogram(zs: &[baryopt::manifold::SpherePoint], bins: usize) -> Vec<f64> {
    let mut h = vec![0.0; bins];
    for z in zs {
        let t = z.coords()[2];
        h[(((t + 1.0) / 2.0 * bins as f64) as usize).min(bins - 1)] += 1.0 / zs.len() as f64;
    }
    h
}

fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

#[test]
fn two_chain_histogram_distance_decays() {
    let u = objective_legendre_sphere();
    let s = u.manifold();
    let k = VonMisesFisher::new(5.0).unwrap();
    let a0 = s.point(&[0.0, 0.0, -1.0]).unwrap();
    let b0 = s.point(&[0.0, 0.0, 1.0]).unwrap();
    let tv = |n: u64| {
        let a = gibbs_samples(&a0, &u, 0.2, &k, n, 3).unwrap();
        let b = gibbs_samples(&b0, &u, 0.2, &k, n, 4).unwrap();
        total_variation(&height_histogram(&a, 20), &height_histogram(&b, 20))
    };
    let short = tv(2_000);
    let long = tv(500_000);
    assert!(long < short, "{long} !< {short}");
    assert!(long < 0.02, "{long}");
}

#[test]
fn transport_preserves_value_distribution() {
    let base = objective_legendre_sphere();
    let s = base.manifold().clone();
    let g = plane_rotation(3, 0, 2, 1.1) * plane_rotation(3, 1, 2, -0.4);
    let moved = objective_transported(base.clone(), g).unwrap();
    let mut rng = stream_rng(5, 0);
    let n = 200_000;
    let bins = 20;
    let mut ha = vec![0.0; bins];
    let mut hb = vec![0.0; bins];
    for _ in 0..n {
        let x = s.random_point(&mut rng);
        let y = s.random_point(&mut rng);
        let idx = |v: f64| (((v + 1.0) / 2.0 * bins as f64) as usize).min(bins - 1);
        ha[idx(base.eval(&x))] += 1.0 / n as f64;
        hb[idx(moved.eval(&y))] += 1.0 / n as f64;
    }
    // two independent samples of 2e5 points over 20 bins: TV well below 0.01
    assert!(total_variation(&ha, &hb) < 0.01);
}

#[test]
fn concentration_scales_with_square_root_of_temperature() {
    let u = objective_legendre_sphere();
    let star = u.known_minimizer().unwrap();
    let t = 3e-3;
    let w = |t: f64| {
        let k = VonMisesFisher::new(47.25 / (3.0 * t)).unwrap();
        let zs = gibbs_samples(&star, &u, t, &k, 200_000, 6).unwrap();
        wasserstein_to_dirac(u.manifold(), &star, &zs).unwrap().value
    };
    let ratio = w(t) / w(t / 4.0);
    assert!((ratio - 2.0).abs() < 0.5, "ratio {ratio}");
}
