//! Independent reference values for the edge-shifted integral
//!
//!   D(p, w) = ∫ φ²(q + p/2) / (2 Σ cᵢ(1 − cos qᵢ) + w²) dq,   cᵢ = cos(pᵢ/2),
//!
//! from the heat-kernel representation 1/s = ∫₀^∞ e^{−ts} dt. Each torus
//! factor is a modified Bessel function, so D becomes a one-dimensional
//! integral over t that is evaluated with composite Gauss-Legendre panels.

#![allow(dead_code)]

use std::f64::consts::PI;

/// e^{−x} I_n(x) for x ≥ 0 and n ∈ {0, 1, 2}.
pub fn ive(n: u32, x: f64) -> f64 {
    assert!(x >= 0.0);
    if x < 30.0 {
        // power series, all terms positive
        let half = x / 2.0;
        let mut term = half.powi(n as i32) / (1..=n).map(f64::from).product::<f64>();
        let mut sum = term;
        let q = half * half;
        for k in 1..500 {
            term *= q / (k as f64 * (k + n) as f64);
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        sum * (-x).exp()
    } else {
        // Hankel expansion
        let mu = 4.0 * (n * n) as f64;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..12 {
            let odd = (2 * k - 1) as f64;
            term *= -(mu - odd * odd) / (k as f64 * 8.0 * x);
            sum += term;
        }
        sum / (2.0 * PI * x).sqrt()
    }
}

fn gauss_legendre_16() -> (Vec<f64>, Vec<f64>) {
    // Golub-Welsch is overkill here; Newton on P_16
    let n = 16;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                let (mut p0, mut p1) = (1.0, z);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
                x[i] = z;
                w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
                break;
            }
        }
    }
    (x, w)
}

/// ∫ₐᵇ f on geometric panels refined toward a.
fn panels<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, levels: i32) -> f64 {
    let (gx, gw) = gauss_legendre_16();
    let mut breaks: Vec<f64> = (0..levels).map(|k| a + (b - a) * 0.5f64.powi(k)).collect();
    breaks.push(a);
    breaks.reverse();
    let mut total = 0.0;
    for win in breaks.windows(2) {
        let (lo, hi) = (win[0], win[1]);
        let (mid, half) = ((lo + hi) / 2.0, (hi - lo) / 2.0);
        for (x, w) in gx.iter().zip(&gw) {
            total += half * w * f(mid + half * x);
        }
    }
    total
}

/// Heat-kernel trace of φ(q + p/2)² e^{−t u₀(p, q)} over the torus for
/// φ = a₀ + Σ aᵢ cos qᵢ.
fn heat_trace(p: [f64; 3], coeffs: [f64; 4], t: f64) -> f64 {
    let s = p.map(|x| x / 2.0);
    let c = s.map(f64::cos);
    let mut e0 = [0.0; 3];
    let mut e1 = [0.0; 3];
    let mut e2 = [0.0; 3];
    for i in 0..3 {
        let x = 2.0 * t * c[i];
        let (i0, i1, i2) = (ive(0, x), ive(1, x), ive(2, x));
        e0[i] = 2.0 * PI * i0;
        e1[i] = 2.0 * PI * s[i].cos() * i1;
        e2[i] = PI * (i0 + (2.0 * s[i]).cos() * i2);
    }
    let [a0, a1, a2, a3] = coeffs;
    let a = [a1, a2, a3];
    let others = |i: usize| [(i + 1) % 3, (i + 2) % 3];
    let mut v = a0 * a0 * e0[0] * e0[1] * e0[2];
    for i in 0..3 {
        let [j, k] = others(i);
        v += 2.0 * a0 * a[i] * e1[i] * e0[j] * e0[k];
        v += a[i] * a[i] * e2[i] * e0[j] * e0[k];
        v += 2.0 * a[j] * a[k] * e1[j] * e1[k] * e0[i];
    }
    v
}

/// D(p, w) for non-degenerate p.
pub fn d_ref(p: [f64; 3], w: f64, coeffs: [f64; 4]) -> f64 {
    let w2 = w * w;
    let f = |t: f64| (-t * w2).exp() * heat_trace(p, coeffs, t);
    let head = panels(&f, 0.0, 1.0, 4);
    // t = 1/v² maps [1, ∞) onto (0, 1]; the integrand stays bounded as v → 0
    let g = |v: f64| {
        if v == 0.0 {
            return 0.0;
        }
        let t = 1.0 / (v * v);
        2.0 * f(t) / (v * v * v)
    };
    let tail = panels(&g, 0.0, 1.0, 40);
    head + tail
}

pub fn edge(p: [f64; 3]) -> f64 {
    let eps = |x: [f64; 3]| 3.0 - x.iter().map(|v| v.cos()).sum::<f64>();
    eps(p) + p.iter().map(|x| 2.0 - 2.0 * (x / 2.0).cos()).sum::<f64>()
}

/// Λ(p, z) for z ≤ m(p).
pub fn lambda_ref(p: [f64; 3], z: f64, coeffs: [f64; 4]) -> f64 {
    d_ref(p, (edge(p) - z).sqrt(), coeffs)
}

pub const CONSTANT: [f64; 4] = [1.0, 0.0, 0.0, 0.0];
pub const EPSILON: [f64; 4] = [3.0, -1.0, -1.0, -1.0];

/// Watson's simple-cubic lattice Green function at the origin,
/// (2π)⁻³ ∫ dq / (3 − Σ cos qᵢ).
pub const WATSON_G: f64 = 0.505_462_019_717_326;
