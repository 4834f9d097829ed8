//! Small-w and small-p behaviour of the determinant near the threshold.
//!
//! Leading terms, with φ(0) the form factor at the origin:
//!
//!   Δ_μ(0, −w²) = Δ_μ(0, 0) + 2π²μφ²(0)·w + O(w²)
//!   Δ_μ₀(p, 0)  = √3·π²μ₀φ²(0)·|p| + O(|p|²)
//!
//! The second follows from the first since √m(p) = (√3/2)|p| + O(|p|³).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dispersion::band_edges;
use crate::fredholm::{d_fn, delta, lambda_fn, mu0, FredholmError, ModelParams, PHI_ZERO_TOL};
use crate::quadrature::QuadratureSpec;
use crate::torus::TorusPoint;

use std::f64::consts::PI;

/// Relative distance from μ₀ accepted as "at criticality".
pub const CRITICAL_MU_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AsymptoticsError {
    #[error(transparent)]
    Fredholm(#[from] FredholmError),
    #[error("invalid sample grid: {0}")]
    Grid(String),
    #[error("coupling {mu} is not the critical value {mu0}")]
    NotCritical { mu: f64, mu0: f64 },
    #[error("form factor must vanish at the origin, got φ(0) = {0}")]
    RegimeMismatch(f64),
    #[error("direction must be a nonzero finite vector")]
    Direction,
    #[error("h_step must lie in [1e-3, 1e-1], got {0}")]
    Step(f64),
    #[error("lower bound is not positive: min Δ/|p|² = {0}")]
    TheoremViolation(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    /// (s, value) pairs with value the fitted quantity at s.
    pub samples: Vec<(f64, f64)>,
    /// The fixed s = 0 value of the two-term model.
    pub intercept: f64,
    pub fitted_slope: f64,
    pub fitted_curvature: f64,
    pub residual_rms: f64,
    pub theoretical_slope: f64,
    pub rel_error: Option<f64>,
}

impl SlopeFit {
    fn new(samples: Vec<(f64, f64)>, intercept: f64, theoretical_slope: f64) -> Self {
        let (a1, a2) = fit_linear_quadratic(&samples, intercept);
        let ss: f64 = samples.iter().map(|&(s, v)| (v - intercept - a1 * s - a2 * s * s).powi(2)).sum();
        let residual_rms = (ss / samples.len() as f64).sqrt();
        let rel_error = (theoretical_slope != 0.0).then(|| (a1 - theoretical_slope).abs() / theoretical_slope.abs());
        Self { samples, intercept, fitted_slope: a1, fitted_curvature: a2, residual_rms, theoretical_slope, rel_error }
    }

    /// Relative error of the fitted slope against an arbitrary reference.
    pub fn rel_error_against(&self, reference: f64) -> f64 {
        (self.fitted_slope - reference).abs() / reference.abs()
    }
}

/// Least squares for v − c = a₁s + a₂s².
fn fit_linear_quadratic(samples: &[(f64, f64)], c: f64) -> (f64, f64) {
    let (mut s2, mut s3, mut s4, mut sy1, mut sy2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(s, v) in samples {
        let y = v - c;
        s2 += s * s;
        s3 += s * s * s;
        s4 += s * s * s * s;
        sy1 += s * y;
        sy2 += s * s * y;
    }
    let det = s2 * s4 - s3 * s3;
    ((sy1 * s4 - sy2 * s3) / det, (s2 * sy2 - s3 * sy1) / det)
}

fn check_grid(grid: &[f64], lo_open: f64, hi: f64, name: &str) -> Result<(), AsymptoticsError> {
    if grid.len() < 4 {
        return Err(AsymptoticsError::Grid(format!("{name} needs at least 4 points")));
    }
    if let Some(x) = grid.iter().find(|&&x| !(x > lo_open && x <= hi)) {
        return Err(AsymptoticsError::Grid(format!("{name} value {x} outside ({lo_open}, {hi}]")));
    }
    Ok(())
}

fn require_critical(params: &ModelParams, quad: &QuadratureSpec) -> Result<f64, AsymptoticsError> {
    let m0 = mu0(params.form_factor(), quad)?;
    if (params.mu() - m0).abs() > CRITICAL_MU_TOL * m0 {
        return Err(AsymptoticsError::NotCritical { mu: params.mu(), mu0: m0 });
    }
    Ok(m0)
}

/// Fit Δ_μ(0, −w²) = Δ_μ(0, 0) + a₁w + a₂w² on `w_grid` ⊂ (0, 0.3].
pub fn fit_w_slope(params: &ModelParams, quad: &QuadratureSpec, w_grid: &[f64]) -> Result<SlopeFit, AsymptoticsError> {
    check_grid(w_grid, 0.0, 0.3, "w grid")?;
    let at = |w: f64| -> Result<f64, FredholmError> {
        Ok(1.0 - params.mu() * d_fn(&TorusPoint::ZERO, w, params, quad)?.value)
    };
    let intercept = at(0.0)?;
    let samples = w_grid.par_iter().map(|&w| Ok((w, at(w)?))).collect::<Result<Vec<_>, FredholmError>>()?;
    let phi0 = params.form_factor().value_at_zero();
    Ok(SlopeFit::new(samples, intercept, 2.0 * PI * PI * params.mu() * phi0 * phi0))
}

fn unit(direction: [f64; 3]) -> Result<[f64; 3], AsymptoticsError> {
    let n = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(n > 0.0 && n.is_finite()) {
        return Err(AsymptoticsError::Direction);
    }
    Ok(direction.map(|x| x / n))
}

/// Fit Δ_μ₀(s·direction, 0) = a₁s + a₂s² on `s_grid` ⊂ (0, 0.2].
pub fn fit_p_slope(
    params: &ModelParams,
    quad: &QuadratureSpec,
    direction: [f64; 3],
    s_grid: &[f64],
) -> Result<SlopeFit, AsymptoticsError> {
    check_grid(s_grid, 0.0, 0.2, "s grid")?;
    let d = unit(direction)?;
    let m0 = require_critical(params, quad)?;
    let samples = s_grid
        .par_iter()
        .map(|&s| {
            let p = TorusPoint::new(s * d[0], s * d[1], s * d[2]);
            Ok((s, delta(&p, 0.0, params, quad)?.value))
        })
        .collect::<Result<Vec<_>, FredholmError>>()?;
    let phi0 = params.form_factor().value_at_zero();
    Ok(SlopeFit::new(samples, 0.0, 3f64.sqrt() * PI * PI * m0 * phi0 * phi0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBound {
    /// (|p|, Δ_μ₀(p, 0)/|p|²)
    pub ratios: Vec<(f64, f64)>,
    pub c: f64,
    pub max_ratio: f64,
}

/// min over samples of Δ_μ₀(p, 0)/|p|² in the threshold-eigenvalue regime φ(0) = 0.
pub fn quadratic_lower_bound(
    params: &ModelParams,
    quad: &QuadratureSpec,
    p_samples: &[TorusPoint],
) -> Result<LowerBound, AsymptoticsError> {
    let phi0 = params.form_factor().value_at_zero();
    if phi0.abs() > PHI_ZERO_TOL {
        return Err(AsymptoticsError::RegimeMismatch(phi0));
    }
    if p_samples.is_empty() || p_samples.iter().any(|p| p.is_zero()) {
        return Err(AsymptoticsError::Grid("p samples must be nonempty and nonzero".into()));
    }
    require_critical(params, quad)?;
    let ratios = p_samples
        .par_iter()
        .map(|p| {
            let n = p.norm();
            Ok((n, delta(p, 0.0, params, quad)?.value / (n * n)))
        })
        .collect::<Result<Vec<_>, FredholmError>>()?;
    let c = ratios.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let max_ratio = ratios.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    if !(c > 0.0) {
        return Err(AsymptoticsError::TheoremViolation(c));
    }
    Ok(LowerBound { ratios, c, max_ratio })
}

/// max over samples of |D(p, w) − D(0, w)|/|p|².
pub fn uniform_p2_residual(
    params: &ModelParams,
    quad: &QuadratureSpec,
    p_samples: &[TorusPoint],
    w_grid: &[f64],
) -> Result<f64, AsymptoticsError> {
    if p_samples.is_empty() || p_samples.iter().any(|p| p.is_zero() || p.norm() > 0.3) {
        return Err(AsymptoticsError::Grid("p samples must satisfy 0 < |p| <= 0.3".into()));
    }
    if w_grid.is_empty() || w_grid.iter().any(|w| !(0.0..=1.0).contains(w)) {
        return Err(AsymptoticsError::Grid("w grid must lie in [0, 1]".into()));
    }
    let pairs: Vec<(TorusPoint, f64)> = p_samples.iter().flat_map(|p| w_grid.iter().map(move |&w| (*p, w))).collect();
    let ratios = pairs
        .par_iter()
        .map(|(p, w)| {
            let dp = d_fn(p, *w, params, quad)?.value;
            let d0 = d_fn(&TorusPoint::ZERO, *w, params, quad)?.value;
            let n = p.norm();
            Ok((dp - d0).abs() / (n * n))
        })
        .collect::<Result<Vec<_>, FredholmError>>()?;
    Ok(ratios.into_iter().fold(0.0, f64::max))
}

/// Central-difference Hessian of Λ(·, 0) at p = 0 with step h.
pub fn hessian_at_zero(params: &ModelParams, quad: &QuadratureSpec, h: f64) -> Result<[[f64; 3]; 3], AsymptoticsError> {
    if !(1e-3..=1e-1).contains(&h) {
        return Err(AsymptoticsError::Step(h));
    }
    let lam = |x: [f64; 3]| -> Result<f64, FredholmError> {
        let p = TorusPoint::from_array(x);
        let z = band_edges(&p).lower.min(0.0);
        Ok(lambda_fn(&p, z, params, quad)?.value)
    };
    let e = |i: usize, s: f64| {
        let mut x = [0.0; 3];
        x[i] = s;
        x
    };
    let add = |a: [f64; 3], b: [f64; 3]| [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
    let mut points = vec![[0.0; 3]];
    for i in 0..3 {
        points.push(e(i, h));
        points.push(e(i, -h));
    }
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
            points.push(add(e(i, si * h), e(j, sj * h)));
        }
    }
    let v = points.par_iter().map(|&x| lam(x)).collect::<Result<Vec<_>, FredholmError>>()?;
    let mut hess = [[0.0; 3]; 3];
    for i in 0..3 {
        hess[i][i] = (v[1 + 2 * i] - 2.0 * v[0] + v[2 + 2 * i]) / (h * h);
    }
    for (k, (i, j)) in [(0, 1), (0, 2), (1, 2)].into_iter().enumerate() {
        let b = 7 + 4 * k;
        let x = (v[b] - v[b + 1] - v[b + 2] + v[b + 3]) / (4.0 * h * h);
        hess[i][j] = x;
        hess[j][i] = x;
    }
    Ok(hess)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::form_factor::FormFactor;

    fn critical(ff: FormFactor) -> (QuadratureSpec, ModelParams) {
        let q = QuadratureSpec::default();
        let m0 = mu0(&ff, &q).unwrap();
        (q, ModelParams::new(m0, ff).unwrap())
    }

    const W_GRID: [f64; 5] = [0.2, 0.1, 0.05, 0.025, 0.0125];
    const S_GRID: [f64; 4] = [0.1, 0.05, 0.025, 0.0125];

    #[test]
    fn least_squares_recovers_polynomial() {
        let samples: Vec<(f64, f64)> = [0.1, 0.2, 0.3, 0.4].iter().map(|&s| (s, 1.0 + 2.0 * s - 3.0 * s * s)).collect();
        let (a1, a2) = fit_linear_quadratic(&samples, 1.0);
        assert!((a1 - 2.0).abs() < 1e-12 && (a2 + 3.0).abs() < 1e-12);
    }

    #[test]
    fn w_slope_constant_form_factor() {
        let (q, p) = critical(FormFactor::constant(1.0).unwrap());
        let fit = fit_w_slope(&p, &q, &W_GRID).unwrap();
        assert!(fit.fitted_slope > 0.0);
        assert!(fit.rel_error.unwrap() < 0.02, "{fit:?}");
        assert!(fit.residual_rms < 0.1 * fit.fitted_slope * 0.0125);
        let p2 = p.with_mu(2.0 * p.mu()).unwrap();
        let fit2 = fit_w_slope(&p2, &q, &W_GRID).unwrap();
        assert!((fit2.fitted_slope / fit.fitted_slope - 2.0).abs() < 0.02);
    }

    #[test]
    fn w_slope_vanishes_for_epsilon_type() {
        let (q, p) = critical(FormFactor::epsilon_type());
        let fit = fit_w_slope(&p, &q, &W_GRID).unwrap();
        assert_eq!(fit.theoretical_slope, 0.0);
        // the two-term model absorbs the w⁴ term; same fit on a Bessel-integral oracle
        assert!((fit.fitted_slope - 1.628_56e-4).abs() < 1e-8, "{}", fit.fitted_slope);
        let narrow = fit_w_slope(&p, &q, &[0.05, 0.025, 0.0125, 0.00625]).unwrap();
        assert!((narrow.fitted_slope - 2.7746e-6).abs() < 1e-8, "{}", narrow.fitted_slope);
        assert!(narrow.fitted_slope.abs() < 1e-4);
    }

    #[test]
    fn p_slope_and_sandwich() {
        let (q, p) = critical(FormFactor::constant(1.0).unwrap());
        let mut slopes = vec![];
        for dir in [[1.0, 0.0, 0.0], [1.0, 1.0, 1.0], [1.0, 2.0, 0.0]] {
            let fit = fit_p_slope(&p, &q, dir, &S_GRID).unwrap();
            assert!(fit.rel_error.unwrap() < 0.03, "{fit:?}");
            for &(s, v) in &fit.samples {
                assert!(v / s >= 0.5 * fit.fitted_slope && v / s <= 2.0 * fit.fitted_slope);
            }
            slopes.push(fit.fitted_slope);
        }
        let spread = slopes.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            / slopes.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(spread < 1.03);
        let w = fit_w_slope(&p, &q, &W_GRID).unwrap();
        assert!((slopes[0] / (w.fitted_slope * 3f64.sqrt() / 2.0) - 1.0).abs() < 0.05);
    }

    #[test]
    fn p_slope_requires_criticality() {
        let (q, p) = critical(FormFactor::constant(1.0).unwrap());
        let off = p.with_mu(1.1 * p.mu()).unwrap();
        assert!(matches!(fit_p_slope(&off, &q, [1.0, 0.0, 0.0], &S_GRID), Err(AsymptoticsError::NotCritical { .. })));
        assert!(fit_p_slope(&p, &q, [0.0; 3], &S_GRID).is_err());
        assert!(fit_p_slope(&p, &q, [1.0, 0.0, 0.0], &[0.3, 0.1, 0.05, 0.01]).is_err());
        assert!(fit_w_slope(&p, &q, &[0.1, 0.05, 0.025]).is_err());
    }

    #[test]
    fn lower_bound_in_eigenvalue_regime() {
        let (q, p) = critical(FormFactor::epsilon_type());
        let samples: Vec<TorusPoint> = (0..8)
            .map(|k| {
                let r = 0.01 * 50f64.powf(k as f64 / 7.0);
                let d = [1.0, 0.3 + 0.1 * k as f64, -0.5];
                let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
                TorusPoint::new(r * d[0] / n, r * d[1] / n, r * d[2] / n)
            })
            .collect();
        let lb = quadratic_lower_bound(&p, &q, &samples).unwrap();
        assert!(lb.c > 0.0);
        assert!(lb.max_ratio / lb.c < 10.0);
        let fit = fit_p_slope(&p, &q, [1.0, 0.0, 0.0], &S_GRID).unwrap();
        assert!(fit.fitted_slope.abs() < 1e-4);
        let (q, one) = critical(FormFactor::constant(1.0).unwrap());
        assert!(matches!(quadratic_lower_bound(&one, &q, &samples), Err(AsymptoticsError::RegimeMismatch(_))));
    }

    #[test]
    fn p2_residual_is_stable() {
        let (q, p) = critical(FormFactor::constant(1.0).unwrap());
        let w = [0.0, 0.1, 0.5, 1.0];
        let big = uniform_p2_residual(&p, &q, &[TorusPoint::new(0.2, 0.0, 0.0)], &w).unwrap();
        let small = uniform_p2_residual(&p, &q, &[TorusPoint::new(0.1, 0.0, 0.0)], &w).unwrap();
        assert!(big.is_finite() && small.is_finite());
        assert!((big / small - 1.0).abs() < 0.5, "{big} {small}");
        let far = uniform_p2_residual(&p, &q, &[TorusPoint::new(0.1, 0.0, 0.0)], &[0.5]).unwrap();
        assert!(far <= small);
        let a = TorusPoint::new(0.1, -0.05, 0.2);
        let plus = d_fn(&a, 0.3, &p, &q).unwrap().value;
        let minus = d_fn(&-a, 0.3, &p, &q).unwrap().value;
        assert!((plus - minus).abs() < 1e-10);
        assert!(uniform_p2_residual(&p, &q, &[TorusPoint::new(0.5, 0.0, 0.0)], &w).is_err());
    }

    #[test]
    fn hessian_is_negative_and_diagonal() {
        let (q, p) = critical(FormFactor::constant(1.0).unwrap());
        let h = hessian_at_zero(&p, &q, 0.05).unwrap();
        for i in 0..3 {
            assert!(h[i][i] < 0.0);
            assert!(((h[i][i] - h[0][0]) / h[0][0]).abs() < 1e-6, "{h:?}");
            for j in 0..3 {
                if i != j {
                    assert!(h[i][j].abs() < 1e-3 * h[i][i].abs(), "{h:?}");
                }
            }
        }
        assert!(hessian_at_zero(&p, &q, 0.5).is_err());
    }
}
