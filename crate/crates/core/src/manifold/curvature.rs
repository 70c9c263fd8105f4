use super::Manifold;
use crate::error::{Error, Result};

/// Finite-difference estimate of the sectional curvature of the plane spanned
/// by `u` and `v` at `x`.
///
/// Uses `d^2(exp(tu), exp(tv)) = 2 t^2 - K t^4 / 3 + O(t^6)` for orthonormal
/// `u`, `v`, with one Richardson step between `t` and `t/2`. The pair is
/// orthonormalised first.
pub fn sectional_curvature_probe<M: Manifold>(
    m: &M,
    x: &M::Point,
    u: &M::Vector,
    v: &M::Vector,
) -> Result<f64> {
    let nu = m.norm(x, u);
    let nv = m.norm(x, v);
    let uv = m.inner(x, u, v);
    let wedge = (nu * nu * nv * nv - uv * uv).max(0.0).sqrt();
    if wedge < 1e-8 {
        return Err(Error::DegenerateSpan(wedge));
    }
    let e1 = m.scale(u, 1.0 / nu);
    let w = m.axpy(v, -m.inner(x, &e1, v), &e1);
    let e2 = m.scale(&w, 1.0 / m.norm(x, &w));

    let estimate = |t: f64| {
        let a = m.exp(x, &m.scale(&e1, t));
        let b = m.exp(x, &m.scale(&e2, t));
        let d = m.distance(&a, &b);
        3.0 * (2.0 * t * t - d * d) / t.powi(4)
    };
    let t = 0.02;
    let coarse = estimate(t);
    let fine = estimate(t / 2.0);
    Ok((4.0 * fine - coarse) / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{Grassmann, Sphere};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unit_sphere_has_curvature_one() {
        let s = Sphere::new(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let x = s.random_point(&mut rng);
            let b = s.tangent_basis(&x);
            let k = sectional_curvature_probe(&s, &x, &b[0], &b[1]).unwrap();
            assert!((k - 1.0).abs() < 1e-3, "k = {k}");
        }
    }

    #[test]
    fn degenerate_span_is_rejected() {
        let s = Sphere::new(2).unwrap();
        let x = s.point(&[0.0, 0.0, 1.0]).unwrap();
        let b = s.tangent_basis(&x);
        let r = sectional_curvature_probe(&s, &x, &b[0], &(&b[0] * 2.0));
        assert!(matches!(r, Err(Error::DegenerateSpan(_))));
    }

    #[test]
    fn cp1_probe_hits_declared_bound() {
        let g = Grassmann::new(1, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = g.random_point(&mut rng);
        let b = g.tangent_basis(&x);
        let k = sectional_curvature_probe(&g, &x, &b[0], &b[1]).unwrap();
        assert!((k - g.descriptor().kappa_sq).abs() < 1e-3, "k = {k}");
    }

    #[test]
    fn holomorphic_plane_in_gr24_attains_four() {
        let g = Grassmann::new(2, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = g.random_point(&mut rng);
        let b = g.tangent_basis(&x);
        // b[0] and b[1] share the same frame entry with real and imaginary units
        let k = sectional_curvature_probe(&g, &x, &b[0], &b[1]).unwrap();
        assert!((k - 4.0).abs() < 1e-3, "k = {k}");
    }
}
