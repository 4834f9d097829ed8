//! The Fredholm determinant Δ_μ(p, z) = 1 − μΛ(p, z) and related scalars.
//!
//! For z below the band edge, Λ is computed in edge-shifted variables
//!
//!   Λ(p, z) = D(p, w) = ∫ φ²(q + p/2) / (u₀(p, q) + w²) dq,   w² = m(p) − z,
//!
//! which puts the near-singularity at q = 0 for every p.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dispersion::{band_edges, half_cosines, u};
use crate::form_factor::FormFactor;
use crate::quadrature::{
    integrate_peaked, integrate_smooth, integrate_split, split_inverse, split_inverse_square, IntegralValue, Patch,
    QuadError, QuadratureSpec,
};
use crate::torus::TorusPoint;

/// |φ(0)| at or below this counts as a vanishing form factor at the origin.
pub const PHI_ZERO_TOL: f64 = 1e-9;
/// Default relative tolerance on μ for calling a coupling critical.
pub const CRITICAL_REL_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FredholmError {
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error("spectral parameter z = {z} lies above the band edge m(p) = {edge}")]
    AboveEdge { z: f64, edge: f64 },
    #[error("band-edge queries at partially degenerate p = {0} are not supported")]
    EdgeUnsupported(TorusPoint),
    #[error("determinant is unbounded at the edge of the collapsed band at p = {0}")]
    CollapsedEdge(TorusPoint),
    #[error("coupling must be positive and finite, got {0}")]
    InvalidCoupling(f64),
    #[error("peak parameter w must be non-negative, got {0}")]
    NegativeW(f64),
    #[error("radii must be decreasing and lie in (0, 1]: {0:?}")]
    InvalidRadii(Vec<f64>),
}

/// Coupling μ > 0 and form factor φ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    mu: f64,
    ff: FormFactor,
}

impl ModelParams {
    pub fn new(mu: f64, ff: FormFactor) -> Result<Self, FredholmError> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(FredholmError::InvalidCoupling(mu));
        }
        Ok(Self { mu, ff })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn form_factor(&self) -> &FormFactor {
        &self.ff
    }

    pub fn with_mu(&self, mu: f64) -> Result<Self, FredholmError> {
        Self::new(mu, self.ff.clone())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeterminantValue {
    pub value: f64,
    pub err_est: f64,
    pub p: TorusPoint,
    pub z: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdKind {
    ZeroEnergyResonance,
    ZeroEigenvalue,
    Subcritical,
    Supercritical,
}

impl ThresholdKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ThresholdKind::ZeroEnergyResonance => "zero_energy_resonance",
            ThresholdKind::ZeroEigenvalue => "zero_eigenvalue",
            ThresholdKind::Subcritical => "subcritical",
            ThresholdKind::Supercritical => "supercritical",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdClass {
    pub class: ThresholdKind,
    pub mu0: f64,
}

fn is_fully_degenerate(p: &TorusPoint) -> bool {
    p.boundary_axes().iter().all(|&b| b)
}

fn is_partially_degenerate(p: &TorusPoint) -> bool {
    let axes = p.boundary_axes();
    axes.iter().any(|&b| b) && !axes.iter().all(|&b| b)
}

/// D(p, w) with w² given directly, so that z = m(p) − w² round-trips.
fn shifted_integral(
    p: &TorusPoint,
    w2: f64,
    ff: &FormFactor,
    quad: &QuadratureSpec,
) -> Result<IntegralValue, QuadError> {
    let s = p.half().coords();
    let g = |q: &[f64; 3]| {
        let v = ff.eval_raw(&[q[0] + s[0], q[1] + s[1], q[2] + s[2]]);
        v * v
    };
    integrate_peaked(g, p, w2.sqrt(), quad)
}

/// Λ(p, z) = ∫ φ²(t) / (u(p, t) − z) dt for real z ≤ m(p).
pub fn lambda_fn(
    p: &TorusPoint,
    z: f64,
    params: &ModelParams,
    quad: &QuadratureSpec,
) -> Result<IntegralValue, FredholmError> {
    let edge = band_edges(p).lower;
    if z > edge {
        return Err(FredholmError::AboveEdge { z, edge });
    }
    let ff = &params.ff;
    if is_fully_degenerate(p) {
        // u(p, ·) ≡ 12 on the corner
        if z == edge {
            return Err(FredholmError::CollapsedEdge(*p));
        }
        return Ok(IntegralValue { value: ff.l2_norm_sq() / (edge - z), err_est: 0.0, n_evals: 0 });
    }
    if is_partially_degenerate(p) {
        if z == edge {
            return Err(FredholmError::EdgeUnsupported(*p));
        }
        let f = |t: &[f64; 3]| {
            let v = ff.eval_raw(t);
            v * v / (u(p, &TorusPoint::from_array(*t)) - z)
        };
        return Ok(integrate_smooth(f, quad)?);
    }
    Ok(shifted_integral(p, edge - z, ff, quad)?)
}

/// Δ_μ(p, z) = 1 − μΛ(p, z).
pub fn delta(
    p: &TorusPoint,
    z: f64,
    params: &ModelParams,
    quad: &QuadratureSpec,
) -> Result<DeterminantValue, FredholmError> {
    let lam = lambda_fn(p, z, params, quad)?;
    Ok(DeterminantValue { value: 1.0 - params.mu * lam.value, err_est: params.mu * lam.err_est, p: *p, z })
}

/// The nontrivial eigenvalue μΛ(p, z) of the rank-one Birman-Schwinger operator.
pub fn bs_eigenvalue(
    p: &TorusPoint,
    z: f64,
    params: &ModelParams,
    quad: &QuadratureSpec,
) -> Result<f64, FredholmError> {
    Ok(params.mu * lambda_fn(p, z, params, quad)?.value)
}

/// D(p, w) = ∫ φ²(q + p/2) / (u₀(p, q) + w²) dq for non-degenerate p.
pub fn d_fn(
    p: &TorusPoint,
    w: f64,
    params: &ModelParams,
    quad: &QuadratureSpec,
) -> Result<IntegralValue, FredholmError> {
    if !(w >= 0.0) {
        return Err(FredholmError::NegativeW(w));
    }
    Ok(shifted_integral(p, w * w, &params.ff, quad)?)
}

/// Critical coupling μ₀ = 1/Λ(0, 0), with the propagated error estimate.
pub fn critical_coupling(ff: &FormFactor, quad: &QuadratureSpec) -> Result<IntegralValue, FredholmError> {
    let lam = shifted_integral(&TorusPoint::ZERO, 0.0, ff, quad)?;
    let mu0 = 1.0 / lam.value;
    Ok(IntegralValue { value: mu0, err_est: lam.err_est * mu0 * mu0, n_evals: lam.n_evals })
}

pub fn mu0(ff: &FormFactor, quad: &QuadratureSpec) -> Result<f64, FredholmError> {
    Ok(critical_coupling(ff, quad)?.value)
}

/// Classify the threshold behaviour of h_μ(0) at relative tolerance `tol` on μ.
pub fn classify_threshold(
    params: &ModelParams,
    quad: &QuadratureSpec,
    tol: f64,
) -> Result<ThresholdClass, FredholmError> {
    let mu0 = mu0(&params.ff, quad)?;
    let class = if (params.mu - mu0).abs() <= tol * mu0 {
        if params.ff.value_at_zero().abs() > PHI_ZERO_TOL {
            ThresholdKind::ZeroEnergyResonance
        } else {
            ThresholdKind::ZeroEigenvalue
        }
    } else if params.mu < mu0 {
        ThresholdKind::Subcritical
    } else {
        ThresholdKind::Supercritical
    };
    Ok(ThresholdClass { class, mu0 })
}

/// Truncated norms of the threshold solution f = φ / u(0, ·) outside B(0, δ).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub delta: f64,
    pub l1: f64,
    pub l2: f64,
}

/// L1(δ) = ∫_{|q|>δ} |f| and L2(δ) = ∫_{|q|>δ} f² for each radius.
///
/// A resonance shows L2 growing like 1/δ with bounded L1; a threshold
/// eigenvalue keeps both bounded.
pub fn threshold_function_diagnostics(
    ff: &FormFactor,
    radii: &[f64],
    quad: &QuadratureSpec,
) -> Result<Vec<ThresholdRow>, FredholmError> {
    let ok = !radii.is_empty() && radii.iter().all(|&d| d > 0.0 && d <= 1.0) && radii.windows(2).all(|w| w[1] < w[0]);
    if !ok {
        return Err(FredholmError::InvalidRadii(radii.to_vec()));
    }
    let scales = half_cosines(&TorusPoint::ZERO);
    // the excluded ball must sit well inside the patch
    let patch = Patch::new(scales, quad.patch_radius.max(0.6));
    let t = patch.t;
    let u0 = |q: &[f64; 3]| crate::dispersion::u0_with_weights(&scales, q);
    radii
        .iter()
        .map(|&delta| {
            let l1 = integrate_split(
                |q| ff.eval_raw(q).abs() * split_inverse(u0(q), t).0,
                |q| ff.eval_raw(q).abs() * split_inverse(u0(q), t).1,
                patch,
                delta,
                quad,
            )?;
            let l2 = integrate_split(
                |q| {
                    let v = ff.eval_raw(q);
                    v * v * split_inverse_square(u0(q), t).0
                },
                |q| {
                    let v = ff.eval_raw(q);
                    v * v * split_inverse_square(u0(q), t).1
                },
                patch,
                delta,
                quad,
            )?;
            Ok(ThresholdRow { delta, l1: l1.value, l2: l2.value })
        })
        .collect()
}
