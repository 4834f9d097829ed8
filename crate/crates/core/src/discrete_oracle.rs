//! Brute-force cross-check: h_μ(p) restricted to an n³ midpoint grid.
//!
//! On the grid the operator is the real symmetric matrix
//! H = diag(u(p, q_j)) − μh³ φ(q_j)φ(q_k), whose eigenvalues below min_j u(p, q_j)
//! are roots of the discrete secular equation. Both routes are exposed.

use faer::diag::Diag;
use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::evd::{self_adjoint_evd, self_adjoint_evd_scratch, ComputeEigenvectors};
use faer::{Mat, Par};
use rayon::prelude::*;
use thiserror::Error;

use crate::dispersion::u;
use crate::form_factor::FormFactor;
use crate::quadrature::midpoint_nodes;
use crate::roots::brent;
use crate::torus::TorusPoint;

pub const MIN_N: usize = 4;
pub const MAX_N: usize = 16;
const MAX_STEPS: usize = 200;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("grid size must be even and within {MIN_N}..={MAX_N}, got {0}")]
    GridSize(usize),
    #[error("coupling must be non-negative and finite, got {0}")]
    InvalidCoupling(f64),
    #[error("dense eigensolver failed: {0}")]
    Eigen(String),
    #[error("secular equation could not be bracketed")]
    Bracket,
}

#[derive(Clone, Debug)]
pub struct GridModel {
    pub n: usize,
    pub p: TorusPoint,
    pub mu: f64,
    pub nodes: Vec<TorusPoint>,
    pub weight: f64,
    pub diag: Vec<f64>,
    pub rank1: Vec<f64>,
}

impl GridModel {
    /// Discretize on the n³ midpoint grid (the same nodes as the tensor rule).
    pub fn build(p: &TorusPoint, mu: f64, ff: &FormFactor, n: usize) -> Result<Self, OracleError> {
        if !n.is_multiple_of(2) || !(MIN_N..=MAX_N).contains(&n) {
            return Err(OracleError::GridSize(n));
        }
        if !(mu >= 0.0 && mu.is_finite()) {
            return Err(OracleError::InvalidCoupling(mu));
        }
        let x = midpoint_nodes(n);
        let nodes: Vec<TorusPoint> =
            (0..n * n * n).map(|j| TorusPoint::new(x[j / (n * n)], x[(j / n) % n], x[j % n])).collect();
        let (diag, rank1) = nodes.par_iter().map(|q| (u(p, q), ff.evaluate(q))).unzip();
        let h = 2.0 * std::f64::consts::PI / n as f64;
        Ok(Self { n, p: *p, mu, nodes, weight: h * h * h, diag, rank1 })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn min_diag(&self) -> f64 {
        self.diag.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Entry H_jk.
    pub fn entry(&self, j: usize, k: usize) -> f64 {
        let d = if j == k { self.diag[j] } else { 0.0 };
        d - self.mu * self.weight * self.rank1[j] * self.rank1[k]
    }

    /// 1 − μh³ Σ φ²(q_j)/(u(p, q_j) − z) for z below the diagonal.
    pub fn determinant(&self, z: f64) -> f64 {
        let s: f64 = self.diag.iter().zip(&self.rank1).map(|(d, f)| f * f / (d - z)).sum();
        1.0 - self.mu * self.weight * s
    }

    /// The discrete determinant at z = d_min − w², which increases in w.
    fn shifted_determinant(&self, dmin: f64, w: f64) -> f64 {
        let w2 = w * w;
        let s: f64 = self.diag.iter().zip(&self.rank1).map(|(d, f)| f * f / (d - dmin + w2)).sum();
        1.0 - self.mu * self.weight * s
    }
}

/// Smallest eigenvalue of the assembled matrix by a dense symmetric solver.
pub fn lowest_eigenvalue_dense(model: &GridModel) -> Result<f64, OracleError> {
    let n = model.dim();
    let a = Mat::<f64>::from_fn(n, n, |j, k| model.entry(j, k));
    let mut s = Diag::<f64>::zeros(n);
    let par = Par::Seq;
    let mut buf = MemBuffer::new(self_adjoint_evd_scratch::<f64>(n, ComputeEigenvectors::No, par, Default::default()));
    self_adjoint_evd(a.as_ref(), s.as_mut(), None, par, MemStack::new(&mut buf), Default::default())
        .map_err(|e| OracleError::Eigen(format!("{e:?}")))?;
    Ok(s.column_vector().iter().cloned().fold(f64::INFINITY, f64::min))
}

/// The eigenvalue below min_j u(p, q_j), from the discrete secular equation.
pub fn secular_root(model: &GridModel) -> Result<Option<f64>, OracleError> {
    if model.mu == 0.0 {
        return Ok(None);
    }
    let dmin = model.min_diag();
    let pinned = model.diag.iter().zip(&model.rank1).any(|(&d, &f)| d == dmin && f != 0.0);
    if !pinned && model.shifted_determinant(dmin, 0.0) >= 0.0 {
        return Ok(None);
    }
    let f = |w: f64| model.shifted_determinant(dmin, w);
    // bracket in w; the determinant tends to −∞ as w → 0 when a node is pinned
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut f_hi = f(hi);
    let mut steps = 0;
    while f_hi <= 0.0 {
        lo = hi;
        hi *= 2.0;
        f_hi = f(hi);
        steps += 1;
        if steps > MAX_STEPS {
            return Err(OracleError::Bracket);
        }
    }
    let mut f_lo = f(lo);
    if !f_lo.is_finite() {
        lo = hi / 2.0;
        f_lo = f(lo);
        while f_lo > 0.0 {
            hi = lo;
            f_hi = f_lo;
            lo /= 2.0;
            f_lo = f(lo);
        }
    }
    let root = brent::<_, std::convert::Infallible, _>(
        |w| Ok(f(w)),
        (lo, f_lo),
        (hi, f_hi),
        |a, b| b * b - a * a <= 1e-14 * (1.0 + dmin.abs()),
        MAX_STEPS,
    )
    .expect("infallible");
    Ok(Some(dmin - root.x * root.x))
}
