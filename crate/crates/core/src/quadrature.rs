//! Integration over the 3-torus.
//!
//! Smooth periodic integrands use the midpoint tensor rule, which is
//! spectrally accurate for them. Integrands of the form g(q)/(u₀(p,q) + w²)
//! have a quadratic minimum of the denominator at q = 0. For those the
//! kernel is split as 1/s = (1 − e^{−Ts})/s + e^{−Ts}/s: the first part is
//! entire and periodic and goes to the tensor rule, the second is
//! concentrated in an ellipsoidal ball around the minimum and is
//! integrated in rescaled spherical coordinates, where the quadratic part
//! of u₀ is isotropic and the r² Jacobian cancels the 1/r² singularity.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dispersion::{half_cosines, u0_with_weights};
use crate::torus::TorusPoint;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("invalid quadrature spec: {0}")]
    InvalidSpec(String),
    #[error("integrand is not finite ({value}) at q = {at:?}")]
    NonFinite { at: [f64; 3], value: f64 },
    #[error("no convergence after {refinements} refinements: last {last}, previous {previous}")]
    NotConverged { refinements: usize, last: f64, previous: f64 },
    #[error("peak parameter w must be non-negative, got {0}")]
    NegativeW(f64),
    #[error("momentum {0} has a component at ±π; the peak is degenerate")]
    DegenerateMomentum(TorusPoint),
}

/// Resolution parameters for torus integrals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Tensor-rule nodes per axis.
    pub n_grid: usize,
    /// Patch scale γ: the ball around the peak has rescaled radius
    /// 2γ·√min cos(pᵢ/2).
    pub patch_radius: f64,
    /// Gauss-Legendre order on each radial panel.
    pub n_radial: usize,
    /// Gauss-Legendre nodes in cos θ; the azimuth gets twice as many.
    pub n_angular: usize,
    pub target_rel_tol: f64,
    pub max_refine: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { n_grid: 48, patch_radius: 1.2, n_radial: 10, n_angular: 16, target_rel_tol: 1e-8, max_refine: 4 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<(), QuadError> {
        if self.n_grid < 8 || !self.n_grid.is_multiple_of(2) {
            return Err(QuadError::InvalidSpec(format!("n_grid must be even and >= 8, got {}", self.n_grid)));
        }
        if !(self.patch_radius > 0.0 && self.patch_radius <= 1.2) {
            return Err(QuadError::InvalidSpec(format!(
                "patch_radius must lie in (0, 1.2], got {}",
                self.patch_radius
            )));
        }
        if self.n_radial < 2 {
            return Err(QuadError::InvalidSpec(format!("n_radial must be >= 2, got {}", self.n_radial)));
        }
        if self.n_angular < 2 {
            return Err(QuadError::InvalidSpec(format!("n_angular must be >= 2, got {}", self.n_angular)));
        }
        if !(self.target_rel_tol > 1e-14 && self.target_rel_tol < 1e-2) {
            return Err(QuadError::InvalidSpec(format!(
                "target_rel_tol must lie in (1e-14, 1e-2), got {}",
                self.target_rel_tol
            )));
        }
        Ok(())
    }

    /// Every resolution doubled.
    pub fn doubled(&self) -> Self {
        Self { n_grid: self.n_grid * 2, n_radial: self.n_radial * 2, n_angular: self.n_angular * 2, ..self.clone() }
    }

    /// Resolutions multiplied by `factor`, keeping the grid even and valid.
    pub fn scaled(&self, factor: f64) -> Self {
        let even = |n: usize, min: usize| {
            let m = ((n as f64 * factor) / 2.0).round() as usize * 2;
            m.max(min)
        };
        Self {
            n_grid: even(self.n_grid, 8),
            n_radial: even(self.n_radial, 2),
            n_angular: even(self.n_angular, 2),
            ..self.clone()
        }
    }

    /// Coarse companion used for the two-level error estimate.
    fn companion(&self) -> Resolution {
        Resolution {
            n_grid: (self.n_grid / 2).max(4),
            n_radial: (self.n_radial / 2).max(2),
            n_angular: (self.n_angular / 2).max(2),
        }
    }

    fn resolution(&self) -> Resolution {
        Resolution { n_grid: self.n_grid, n_radial: self.n_radial, n_angular: self.n_angular }
    }
}

#[derive(Clone, Copy, Debug)]
struct Resolution {
    n_grid: usize,
    n_radial: usize,
    n_angular: usize,
}

/// An integral together with a two-level error estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralValue {
    pub value: f64,
    /// Absolute difference to the next coarser level; not a rigorous bound.
    pub err_est: f64,
    pub n_evals: usize,
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

fn check_finite(v: f64, q: &[f64; 3]) -> Result<f64, QuadError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(QuadError::NonFinite { at: *q, value: v })
    }
}

/// Midpoint nodes q_j = -π + (j + 1/2)h.
pub fn midpoint_nodes(n: usize) -> Vec<f64> {
    let h = 2.0 * PI / n as f64;
    (0..n).map(|j| -PI + (j as f64 + 0.5) * h).collect()
}

/// Tensor midpoint sum h³ Σ f(q_ijk). Slabs are reduced in index order, so
/// the result does not depend on the number of worker threads.
fn tensor_sum<F>(f: &F, n: [usize; 3]) -> Result<(f64, usize), QuadError>
where
    F: Fn(&[f64; 3]) -> f64 + Sync,
{
    let (xs, ys, zs) = (midpoint_nodes(n[0]), midpoint_nodes(n[1]), midpoint_nodes(n[2]));
    let cell = (2.0 * PI).powi(3) / (n[0] * n[1] * n[2]) as f64;
    let slabs: Vec<Result<f64, QuadError>> = xs
        .par_iter()
        .map(|&x| {
            let mut slab = 0.0;
            for &y in &ys {
                let mut row = 0.0;
                for &z in &zs {
                    let q = [x, y, z];
                    row += check_finite(f(&q), &q)?;
                }
                slab += row;
            }
            Ok(slab)
        })
        .collect();
    let mut total = 0.0;
    for s in slabs {
        total += s?;
    }
    Ok((total * cell, n[0] * n[1] * n[2]))
}

/// Integrate a smooth periodic function over the torus.
///
/// The value is the tensor rule at `spec.n_grid`; the error estimate is its
/// difference to the rule at half the resolution.
pub fn integrate_smooth<F>(f: F, spec: &QuadratureSpec) -> Result<IntegralValue, QuadError>
where
    F: Fn(&[f64; 3]) -> f64 + Sync,
{
    spec.validate()?;
    let (fine, n1) = tensor_sum(&f, [spec.n_grid; 3])?;
    let (coarse, n2) = tensor_sum(&f, [spec.n_grid / 2; 3])?;
    Ok(IntegralValue { value: fine, err_est: (fine - coarse).abs(), n_evals: n1 + n2 })
}

/// Split of the kernel 1/s into an entire part (1 − e^{−Ts})/s and a
/// Gaussian-localized part e^{−Ts}/s.
#[inline]
pub fn split_inverse(s: f64, t: f64) -> (f64, f64) {
    let x = t * s;
    let smooth = if x < 1e-300 { t } else { -(-x).exp_m1() / s };
    (smooth, (-x).exp() / s)
}

/// Split of 1/s² into the entire part (1 − e^{−Ts}(1 + Ts))/s² and the
/// localized remainder e^{−Ts}(1 + Ts)/s².
#[inline]
pub fn split_inverse_square(s: f64, t: f64) -> (f64, f64) {
    let x = t * s;
    let smooth = if x < 1e-2 {
        t * t * (0.5 - x / 3.0 + x * x / 8.0 - x * x * x / 30.0)
    } else {
        (1.0 - (-x).exp() * (1.0 + x)) / (s * s)
    };
    (smooth, (-x).exp() * (1.0 + x) / (s * s))
}

/// Number of radial panels of the patch: geometric with ratio 3 towards
/// the peak, plus the innermost panel ending at the peak.
const RADIAL_PANELS: usize = 11;
/// Largest per-axis refinement of the anisotropic grid.
const MAX_AXIS_RATIO: f64 = 8.0;

/// Ball Σ cᵢ qᵢ² < R² around the peak and the Gaussian scale T of the
/// kernel split, chosen so that e^{−T u₀} < e^{−40} outside the ball.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Patch {
    pub scales: [f64; 3],
    pub radius: f64,
    pub t: f64,
}

impl Patch {
    pub fn new(scales: [f64; 3], gamma: f64) -> Self {
        let cmin = scales.iter().cloned().fold(f64::INFINITY, f64::min);
        let radius = 2.0 * gamma * cmin.sqrt();
        // 1 − cos x ≥ 2x²/π² on the cell, so u₀ ≥ 4ρ²/π² there
        let t = 10.0 * PI * PI / (radius * radius);
        Self { scales, radius, t }
    }

    /// Per-axis tensor sizes balancing the Gaussian width along each axis.
    fn grid_sizes(&self, n_grid: usize) -> [usize; 3] {
        let cmin = self.scales.iter().cloned().fold(f64::INFINITY, f64::min);
        self.scales.map(|c| {
            let ratio = (c / cmin).sqrt().min(MAX_AXIS_RATIO);
            ((n_grid as f64 * ratio / 2.0).round() as usize) * 2
        })
    }

    fn radial_nodes(&self, r_lo: f64, r_hi: f64, order: usize) -> Vec<(f64, f64)> {
        let mut breaks: Vec<f64> = (0..RADIAL_PANELS - 1).map(|k| self.radius / 3f64.powi(k as i32)).collect();
        breaks.push(0.0);
        breaks.reverse();
        let (gx, gw) = gauss_legendre(order);
        let mut nodes = Vec::new();
        for win in breaks.windows(2) {
            let (a, b) = (win[0].max(r_lo), win[1].min(r_hi));
            if b <= a {
                continue;
            }
            let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
            for (x, w) in gx.iter().zip(&gw) {
                nodes.push((mid + half * x, half * w));
            }
        }
        nodes
    }

    /// ∫ h over the shell r_lo < ρ < r_hi in rescaled spherical coordinates
    /// qᵢ = r ωᵢ / √cᵢ.
    fn shell<H>(&self, h: &H, r_lo: f64, r_hi: f64, res: Resolution) -> Result<(f64, usize), QuadError>
    where
        H: Fn(&[f64; 3]) -> f64 + Sync,
    {
        let radial = self.radial_nodes(r_lo, r_hi, res.n_radial);
        let (ct, cw) = gauss_legendre(res.n_angular);
        let n_phi = 2 * res.n_angular;
        let dphi = 2.0 * PI / n_phi as f64;
        let mut dirs = Vec::with_capacity(ct.len() * n_phi);
        for (c, wc) in ct.iter().zip(&cw) {
            let s = (1.0 - c * c).sqrt();
            for k in 0..n_phi {
                let phi = (k as f64 + 0.5) * dphi;
                dirs.push(([s * phi.cos(), s * phi.sin(), *c], wc * dphi));
            }
        }
        let inv_sqrt = self.scales.map(|c| 1.0 / c.sqrt());
        let jac = inv_sqrt[0] * inv_sqrt[1] * inv_sqrt[2];
        let shells: Vec<Result<f64, QuadError>> = radial
            .par_iter()
            .map(|&(r, wr)| {
                let mut acc = 0.0;
                for (om, wo) in &dirs {
                    let q = [r * om[0] * inv_sqrt[0], r * om[1] * inv_sqrt[1], r * om[2] * inv_sqrt[2]];
                    acc += wo * check_finite(h(&q), &q)?;
                }
                Ok(acc * wr * r * r)
            })
            .collect();
        let mut total = 0.0;
        for s in shells {
            total += s?;
        }
        Ok((total * jac, radial.len() * dirs.len()))
    }

    fn total<S, L>(&self, smooth: &S, local: &L, r_min: f64, res: Resolution) -> Result<(f64, usize), QuadError>
    where
        S: Fn(&[f64; 3]) -> f64 + Sync,
        L: Fn(&[f64; 3]) -> f64 + Sync,
    {
        let (a, na) = tensor_sum(smooth, self.grid_sizes(res.n_grid))?;
        let (b, nb) = self.shell(local, r_min, self.radius, res)?;
        let (core, nc) = if r_min > 0.0 { self.shell(smooth, 0.0, r_min, res)? } else { (0.0, 0) };
        Ok((a - core + b, na + nb + nc))
    }
}

/// ∫ (smooth + local) over the torus minus the core ρ < r_min, where
/// `smooth` is periodic and entire and `local` is negligible outside the
/// patch ball. Requires r_min < patch radius.
pub(crate) fn integrate_split<S, L>(
    smooth: S,
    local: L,
    patch: Patch,
    r_min: f64,
    spec: &QuadratureSpec,
) -> Result<IntegralValue, QuadError>
where
    S: Fn(&[f64; 3]) -> f64 + Sync,
    L: Fn(&[f64; 3]) -> f64 + Sync,
{
    spec.validate()?;
    let (fine, n1) = patch.total(&smooth, &local, r_min, spec.resolution())?;
    let (coarse, n2) = patch.total(&smooth, &local, r_min, spec.companion())?;
    Ok(IntegralValue { value: fine, err_est: (fine - coarse).abs(), n_evals: n1 + n2 })
}

/// ∫ g(q) / (u₀(p,q) + w²) dq over the torus.
///
/// `g` is evaluated at unnormalized coordinates near the peak; it must be
/// 2π-periodic. Momenta with a component at ±π are rejected.
pub fn integrate_peaked<G>(g: G, p: &TorusPoint, w: f64, spec: &QuadratureSpec) -> Result<IntegralValue, QuadError>
where
    G: Fn(&[f64; 3]) -> f64 + Sync,
{
    if !(w >= 0.0) {
        return Err(QuadError::NegativeW(w));
    }
    if p.boundary_axes().iter().any(|&b| b) {
        return Err(QuadError::DegenerateMomentum(*p));
    }
    let c = half_cosines(p);
    let patch = Patch::new(c, spec.patch_radius);
    let (t, w2) = (patch.t, w * w);
    let smooth = |q: &[f64; 3]| g(q) * split_inverse(u0_with_weights(&c, q) + w2, t).0;
    let local = |q: &[f64; 3]| g(q) * split_inverse(u0_with_weights(&c, q) + w2, t).1;
    integrate_split(smooth, local, patch, 0.0, spec)
}

/// Re-run `eval` at doubled resolutions until two successive values agree
/// to `tol` relative, or `spec.max_refine` doublings are spent.
pub fn refine_until<F>(mut eval: F, spec: &QuadratureSpec, tol: f64) -> Result<IntegralValue, QuadError>
where
    F: FnMut(&QuadratureSpec) -> Result<IntegralValue, QuadError>,
{
    if !(tol > 1e-14) {
        return Err(QuadError::InvalidSpec(format!("refinement tolerance {tol} below 1e-14")));
    }
    let mut current = spec.clone();
    let mut prev = eval(&current)?;
    let mut before = prev.value;
    let mut evals = prev.n_evals;
    for _ in 0..spec.max_refine {
        current = current.doubled();
        let next = eval(&current)?;
        evals += next.n_evals;
        let diff = (next.value - prev.value).abs();
        if diff <= tol * next.value.abs() {
            return Ok(IntegralValue { value: next.value, err_est: diff, n_evals: evals });
        }
        before = prev.value;
        prev = next;
    }
    Err(QuadError::NotConverged { refinements: spec.max_refine, last: prev.value, previous: before })
}
