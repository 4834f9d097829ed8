//! Spectral analysis of the rank-one perturbed Friedrichs models
//! h_μ(p) = h₀(p) − μv on the three-dimensional torus.
//!
//! The two-particle dispersion u(p, q) = ε(p) + ε(p − q) + ε(q) with
//! ε(p) = 3 − Σ cos pᵢ defines the free operator; the perturbation is the
//! rank-one operator with an even form factor φ. Everything about the
//! discrete spectrum below the band reduces to the scalar Fredholm
//! determinant Δ_μ(p, z) = 1 − μ ∫ φ²(t)/(u(p,t) − z) dt.

// `!(x > 0.0)` style guards also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod cli;
pub mod discrete_oracle;
pub mod dispersion;
pub mod eigensolver;
pub mod form_factor;
pub mod fredholm;
pub mod quadrature;
pub mod roots;
pub mod torus;

pub use dispersion::{band_edges, epsilon, min_point, u, u0, BandEdges};
pub use eigensolver::{
    band_scan, eigenvalue, has_bound_state, monotonicity_check, BandRow, BoundState, EigenError, Existence,
};
pub use form_factor::{FormFactor, FormFactorKind, TORUS_VOLUME};
pub use fredholm::{
    bs_eigenvalue, classify_threshold, d_fn, delta, lambda_fn, mu0, threshold_function_diagnostics, DeterminantValue,
    FredholmError, ModelParams, ThresholdClass, ThresholdKind,
};
pub use quadrature::{integrate_peaked, integrate_smooth, refine_until, IntegralValue, QuadError, QuadratureSpec};
pub use torus::TorusPoint;
