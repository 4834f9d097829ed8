//! The bound state e_μ(p) below the essential spectrum.
//!
//! Roots are found in w = √(m(p) − z), where 1 − μD(p, w) is increasing and
//! stays smooth up to the edge w = 0.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dispersion::band_edges;
use crate::form_factor::FormFactor;
use crate::fredholm::{d_fn, FredholmError, ModelParams};
use crate::quadrature::QuadratureSpec;
use crate::roots::brent;
use crate::torus::TorusPoint;

/// |Δ_μ(p, m(p))| at or below this is treated as critical.
pub const TOL_EDGE: f64 = 1e-7;
pub const DEFAULT_TOL: f64 = 1e-10;
const MAX_ITER: usize = 200;
const MAX_DOUBLINGS: usize = 60;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigenError {
    #[error(transparent)]
    Fredholm(#[from] FredholmError),
    #[error("tolerance must be positive, got {0}")]
    InvalidTol(f64),
    #[error("no sign change of the determinant below m(p) after {0} doublings")]
    BracketFailed(usize),
    #[error("root finder stopped after {iterations} iterations with bracket [{lo}, {hi}]")]
    NotConverged { iterations: usize, lo: f64, hi: f64 },
    #[error("mu list must be non-empty and strictly increasing")]
    InvalidMuList,
    #[error("no bound state at p = {p} for mu = {mu} >= mu0")]
    TheoremViolation { p: TorusPoint, mu: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Existence {
    Present,
    Absent,
    Inconclusive,
}

impl Existence {
    pub fn as_str(&self) -> &'static str {
        match self {
            Existence::Present => "present",
            Existence::Absent => "absent",
            Existence::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeTest {
    pub existence: Existence,
    /// Δ_μ(p, m(p)); −∞ on the collapsed band at (π, π, π).
    pub edge_value: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundState {
    pub e: f64,
    pub bracket: (f64, f64),
    pub residual: f64,
    pub gap: f64,
    pub iterations: usize,
}

fn is_fully_degenerate(p: &TorusPoint) -> bool {
    p.boundary_axes().iter().all(|&b| b)
}

/// Decide whether h_μ(p) has an eigenvalue below m(p) from the sign of the
/// edge value 1 − μD(p, 0).
pub fn has_bound_state(p: &TorusPoint, params: &ModelParams, quad: &QuadratureSpec) -> Result<EdgeTest, EigenError> {
    if is_fully_degenerate(p) {
        return Ok(EdgeTest { existence: Existence::Present, edge_value: f64::NEG_INFINITY });
    }
    if p.boundary_axes().iter().any(|&b| b) {
        return Err(FredholmError::EdgeUnsupported(*p).into());
    }
    let edge_value = 1.0 - params.mu() * d_fn(p, 0.0, params, quad)?.value;
    let existence = if edge_value < -TOL_EDGE {
        Existence::Present
    } else if edge_value > TOL_EDGE {
        Existence::Absent
    } else {
        Existence::Inconclusive
    };
    Ok(EdgeTest { existence, edge_value })
}

/// The unique eigenvalue below m(p), to within `tol` in z, if one exists.
pub fn eigenvalue(
    p: &TorusPoint,
    params: &ModelParams,
    quad: &QuadratureSpec,
    tol: f64,
) -> Result<Option<BoundState>, EigenError> {
    if !(tol > 0.0) {
        return Err(EigenError::InvalidTol(tol));
    }
    let edge = band_edges(p).lower;
    if is_fully_degenerate(p) {
        // Λ(R, z) = ‖φ‖²/(12 − z)
        let shift = params.mu() * params.form_factor().l2_norm_sq();
        let e = edge - shift;
        let residual = (1.0 - shift / (edge - e)).abs();
        return Ok(Some(BoundState { e, bracket: (e, e), residual, gap: shift, iterations: 0 }));
    }
    let test = has_bound_state(p, params, quad)?;
    if test.existence != Existence::Present {
        return Ok(None);
    }
    let f = |w: f64| -> Result<f64, EigenError> { Ok(1.0 - params.mu() * d_fn(p, w, params, quad)?.value) };

    let (mut w_lo, mut f_lo) = (0.0, test.edge_value);
    let mut w_hi = 1.0;
    let mut f_hi = f(w_hi)?;
    let mut doublings = 0;
    while f_hi <= 0.0 {
        if doublings == MAX_DOUBLINGS {
            return Err(EigenError::BracketFailed(MAX_DOUBLINGS));
        }
        (w_lo, f_lo) = (w_hi, f_hi);
        w_hi *= 2.0;
        f_hi = f(w_hi)?;
        doublings += 1;
    }

    let root = brent(f, (w_lo, f_lo), (w_hi, f_hi), |a, b| b * b - a * a <= tol, MAX_ITER)?;
    if !root.converged {
        return Err(EigenError::NotConverged { iterations: root.iterations, lo: root.lo, hi: root.hi });
    }
    let gap = root.x * root.x;
    Ok(Some(BoundState {
        e: edge - gap,
        bracket: (edge - root.hi * root.hi, edge - root.lo * root.lo),
        residual: root.fx.abs(),
        gap,
        iterations: root.iterations + doublings,
    }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandRow {
    pub p: TorusPoint,
    pub lower: f64,
    pub upper: f64,
    pub existence: Option<Existence>,
    pub state: Option<BoundState>,
    pub error: Option<String>,
}

fn scan_point(p: &TorusPoint, params: &ModelParams, quad: &QuadratureSpec, tol: f64) -> BandRow {
    let edges = band_edges(p);
    let mut row = BandRow { p: *p, lower: edges.lower, upper: edges.upper, existence: None, state: None, error: None };
    let result = has_bound_state(p, params, quad).and_then(|t| Ok((t, eigenvalue(p, params, quad, tol)?)));
    match result {
        Ok((t, state)) => {
            row.existence = Some(t.existence);
            row.state = state;
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Edges and bound state along a path; rows keep the input order and a
/// failing point only marks its own row.
pub fn band_scan(params: &ModelParams, path: &[TorusPoint], quad: &QuadratureSpec, tol: f64) -> Vec<BandRow> {
    path.par_iter().map(|p| scan_point(p, params, quad, tol)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub mus: Vec<f64>,
    /// e_μ(p), or m(p) where the edge test is critical.
    pub energies: Vec<f64>,
    pub decreasing: bool,
}

/// Check that e_μ(p) strictly decreases along an increasing list of μ ≥ μ₀.
pub fn monotonicity_check(
    p: &TorusPoint,
    mu_list: &[f64],
    ff: &FormFactor,
    quad: &QuadratureSpec,
    tol: f64,
) -> Result<MonotonicityReport, EigenError> {
    if mu_list.is_empty() || mu_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(EigenError::InvalidMuList);
    }
    let edge = band_edges(p).lower;
    let mut energies = Vec::with_capacity(mu_list.len());
    for &mu in mu_list {
        let params = ModelParams::new(mu, ff.clone())?;
        let e = match eigenvalue(p, &params, quad, tol)? {
            Some(s) => s.e,
            None => {
                let t = has_bound_state(p, &params, quad)?;
                if t.existence == Existence::Inconclusive && p.is_zero() {
                    edge
                } else {
                    return Err(EigenError::TheoremViolation { p: *p, mu });
                }
            }
        };
        energies.push(e);
    }
    let decreasing = energies.windows(2).all(|w| w[1] < w[0] + 2.0 * tol);
    Ok(MonotonicityReport { mus: mu_list.to_vec(), energies, decreasing })
}
