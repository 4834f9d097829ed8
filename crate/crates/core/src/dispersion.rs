//! Closed-form lattice dispersions, band edges and the edge-shifted dispersion.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::torus::TorusPoint;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DispersionError {
    #[error("minimum of u(p, .) is not unique: p = {p} lies on the cell boundary along axes {axes:?}")]
    Degenerate { p: TorusPoint, axes: [bool; 3] },
}

/// One-particle dispersion ε(p) = 3 − Σ cos p_i.
#[inline]
pub fn epsilon(p: &TorusPoint) -> f64 {
    let [a, b, c] = p.coords();
    3.0 - a.cos() - b.cos() - c.cos()
}

/// Two-particle dispersion u(p, q) = ε(p) + ε(p − q) + ε(q).
pub fn u(p: &TorusPoint, q: &TorusPoint) -> f64 {
    epsilon(p) + epsilon(&(*p - *q)) + epsilon(q)
}

/// cos(p_i / 2) for p_i ∈ (-π, π]; exactly zero on the cell boundary.
#[inline]
pub fn half_cos(pi: f64) -> f64 {
    if pi.abs() == std::f64::consts::PI {
        0.0
    } else {
        (pi / 2.0).cos()
    }
}

/// Per-axis curvature weights cos(p_i/2) ∈ [0, 1] of the shifted dispersion.
pub fn half_cosines(p: &TorusPoint) -> [f64; 3] {
    let x = p.coords();
    [half_cos(x[0]), half_cos(x[1]), half_cos(x[2])]
}

/// Lower and upper edges of the essential spectrum [m(p), M(p)].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandEdges {
    pub lower: f64,
    pub upper: f64,
}

pub fn band_edges(p: &TorusPoint) -> BandEdges {
    let e = epsilon(p);
    let c = half_cosines(p);
    let mut lower = e;
    let mut upper = e;
    for ci in c {
        lower += 2.0 - 2.0 * ci;
        upper += 2.0 + 2.0 * ci;
    }
    BandEdges { lower, upper }
}

/// The unique minimizer q₀(p) = p/2 of u(p, ·).
pub fn min_point(p: &TorusPoint) -> Result<TorusPoint, DispersionError> {
    let axes = p.boundary_axes();
    if axes.iter().any(|&a| a) {
        return Err(DispersionError::Degenerate { p: *p, axes });
    }
    Ok(p.half())
}

/// u₀(p, q) = u(p, q + p/2) − m(p) = 2 Σ cos(p_i/2)(1 − cos q_i).
pub fn u0(p: &TorusPoint, q: &TorusPoint) -> f64 {
    u0_with_weights(&half_cosines(p), &q.coords())
}

/// u₀ with precomputed half-angle cosines; `q` need not be normalized.
#[inline]
pub fn u0_with_weights(c: &[f64; 3], q: &[f64; 3]) -> f64 {
    2.0 * (c[0] * (1.0 - q[0].cos()) + c[1] * (1.0 - q[1].cos()) + c[2] * (1.0 - q[2].cos()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_interior(rng: &mut ChaCha8Rng) -> TorusPoint {
        TorusPoint::new(rng.random_range(-3.1..3.1), rng.random_range(-3.1..3.1), rng.random_range(-3.1..3.1))
    }

    #[test]
    fn epsilon_values() {
        assert_eq!(epsilon(&TorusPoint::ZERO), 0.0);
        assert_eq!(epsilon(&TorusPoint::CORNER), 6.0);
        assert!((epsilon(&TorusPoint::new(PI / 2.0, 0.0, 0.0)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn u_values() {
        assert_eq!(u(&TorusPoint::ZERO, &TorusPoint::ZERO), 0.0);
        let q = TorusPoint::new(0.3, -1.2, 2.5);
        assert!((u(&TorusPoint::CORNER, &q) - 12.0).abs() < 1e-13);
        assert!((u(&TorusPoint::ZERO, &q) - 2.0 * epsilon(&q)).abs() < 1e-14);
    }

    #[test]
    fn edges_closed_form() {
        let e = band_edges(&TorusPoint::ZERO);
        assert_eq!((e.lower, e.upper), (0.0, 12.0));
        let e = band_edges(&TorusPoint::CORNER);
        assert_eq!((e.lower, e.upper), (12.0, 12.0));
        let e = band_edges(&TorusPoint::new(PI, 0.0, 0.0));
        assert_eq!((e.lower, e.upper), (4.0, 12.0));
    }

    #[test]
    fn edges_match_grid_search_at_x_point() {
        // brute-force min/max of u(p, .) on a grid refined around the best node
        let p = TorusPoint::new(PI, 0.0, 0.0);
        let n = 64;
        let h = 2.0 * PI / n as f64;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let q = TorusPoint::new(-PI + i as f64 * h, -PI + j as f64 * h, -PI + k as f64 * h);
                    let v = u(&p, &q);
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
        }
        assert!((lo - 4.0).abs() < 1e-12);
        assert!((hi - 12.0).abs() < 1e-12);
    }

    #[test]
    fn minimizer() {
        assert_eq!(min_point(&TorusPoint::ZERO).unwrap(), TorusPoint::ZERO);
        let p = TorusPoint::new(1.0, 0.5, -0.5);
        let q0 = min_point(&p).unwrap();
        assert_eq!(q0, TorusPoint::new(0.5, 0.25, -0.25));
        assert!((u(&p, &q0) - band_edges(&p).lower).abs() < 1e-14);
        assert!(matches!(
            min_point(&TorusPoint::new(PI, 0.0, 0.0)),
            Err(DispersionError::Degenerate { axes: [true, false, false], .. })
        ));
    }

    #[test]
    fn u0_values() {
        let p = TorusPoint::new(1.0, 1.0, 1.0);
        assert_eq!(u0(&p, &TorusPoint::ZERO), 0.0);
        let q = TorusPoint::new(0.7, -2.0, 1.3);
        assert!((u0(&TorusPoint::ZERO, &q) - 2.0 * epsilon(&q)).abs() < 1e-14);
        let q = TorusPoint::new(1.0, 2.0, 3.0);
        let direct = u(&p, &(q + p.half())) - band_edges(&p).lower;
        assert!((u0(&p, &q) - direct).abs() < 1e-14);
    }

    #[test]
    fn random_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut strict = 0;
        let total = 1000;
        for _ in 0..total {
            let p = random_interior(&mut rng);
            let q = random_interior(&mut rng);
            let e = band_edges(&p);
            let v = u(&p, &q);
            assert!(v >= e.lower - 1e-13 && v <= e.upper + 1e-13);
            let shifted = u(&p, &(q + p.half())) - e.lower;
            assert!((u0(&p, &q) - shifted).abs() < 1e-13);
            assert!((u(&-p, &-q) - v).abs() < 1e-13);
            assert_eq!(epsilon(&-p), epsilon(&p));
            // edge-shifted dispersion lies below the p = 0 dispersion
            let a = u0(&p, &q);
            let b = u(&TorusPoint::ZERO, &q);
            assert!(a <= b + 1e-14);
            if a < b {
                strict += 1;
            }
        }
        assert!(strict as f64 >= 0.99 * total as f64);
    }
}
