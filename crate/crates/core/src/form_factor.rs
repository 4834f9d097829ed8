//! Even form factors φ of the rank-one perturbation.
//!
//! All built-ins are first-order cosine polynomials φ(q) = a₀ + Σ aᵢ cos qᵢ,
//! which makes evenness exact and gives the L² norm in closed form.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::torus::TorusPoint;

/// (2π)³, the volume of the torus.
pub const TORUS_VOLUME: f64 = 248.050_213_442_398_56;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormFactorError {
    #[error("unknown form factor kind `{0}` (expected constant, epsilon_type or cosine_poly)")]
    UnknownKind(String),
    #[error("form factor `{kind}` expects {expected} coefficient(s), got {got}")]
    Arity { kind: &'static str, expected: &'static str, got: usize },
    #[error("form factor is identically zero")]
    Zero,
    #[error("non-finite coefficient")]
    NonFinite,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormFactorKind {
    Constant,
    EpsilonType,
    CosinePoly,
}

impl FormFactorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            FormFactorKind::Constant => "constant",
            FormFactorKind::EpsilonType => "epsilon_type",
            FormFactorKind::CosinePoly => "cosine_poly",
        }
    }
}

impl FromStr for FormFactorKind {
    type Err = FormFactorError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "constant" => Ok(FormFactorKind::Constant),
            "epsilon_type" | "epsilon" => Ok(FormFactorKind::EpsilonType),
            "cosine_poly" => Ok(FormFactorKind::CosinePoly),
            other => Err(FormFactorError::UnknownKind(other.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormFactor {
    kind: FormFactorKind,
    /// a₀, a₁, a₂, a₃
    coeffs: [f64; 4],
    value_at_zero: f64,
    l2_norm_sq: f64,
}

impl FormFactor {
    fn from_coeffs(kind: FormFactorKind, coeffs: [f64; 4]) -> Result<Self, FormFactorError> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(FormFactorError::NonFinite);
        }
        let [a0, a1, a2, a3] = coeffs;
        let l2_norm_sq = TORUS_VOLUME * (a0 * a0 + 0.5 * (a1 * a1 + a2 * a2 + a3 * a3));
        if l2_norm_sq <= 0.0 {
            return Err(FormFactorError::Zero);
        }
        Ok(Self { kind, coeffs, value_at_zero: a0 + a1 + a2 + a3, l2_norm_sq })
    }

    /// φ ≡ c. Threshold regime: zero-energy resonance.
    pub fn constant(c: f64) -> Result<Self, FormFactorError> {
        Self::from_coeffs(FormFactorKind::Constant, [c, 0.0, 0.0, 0.0])
    }

    /// φ = ε. Vanishes at the origin, so the threshold is an eigenvalue.
    pub fn epsilon_type() -> Self {
        Self::from_coeffs(FormFactorKind::EpsilonType, [3.0, -1.0, -1.0, -1.0]).expect("nonzero")
    }

    /// φ(q) = a₀ + a₁ cos q₁ + a₂ cos q₂ + a₃ cos q₃.
    pub fn cosine_poly(a0: f64, a: [f64; 3]) -> Result<Self, FormFactorError> {
        Self::from_coeffs(FormFactorKind::CosinePoly, [a0, a[0], a[1], a[2]])
    }

    /// Build from the serialized `kind + coefficient list` form.
    pub fn from_parts(kind: FormFactorKind, coeffs: &[f64]) -> Result<Self, FormFactorError> {
        match kind {
            FormFactorKind::Constant => match coeffs {
                [] => Self::constant(1.0),
                [c] => Self::constant(*c),
                _ => Err(FormFactorError::Arity { kind: "constant", expected: "0 or 1", got: coeffs.len() }),
            },
            FormFactorKind::EpsilonType => {
                if coeffs.is_empty() {
                    Ok(Self::epsilon_type())
                } else {
                    Err(FormFactorError::Arity { kind: "epsilon_type", expected: "0", got: coeffs.len() })
                }
            }
            FormFactorKind::CosinePoly => match coeffs {
                [a0, a1, a2, a3] => Self::cosine_poly(*a0, [*a1, *a2, *a3]),
                _ => Err(FormFactorError::Arity { kind: "cosine_poly", expected: "4", got: coeffs.len() }),
            },
        }
    }

    pub fn kind(&self) -> FormFactorKind {
        self.kind
    }

    /// Coefficients as serialized: [c] for constant, [] for epsilon_type, [a₀..a₃] otherwise.
    pub fn serialized_coeffs(&self) -> Vec<f64> {
        match self.kind {
            FormFactorKind::Constant => vec![self.coeffs[0]],
            FormFactorKind::EpsilonType => vec![],
            FormFactorKind::CosinePoly => self.coeffs.to_vec(),
        }
    }

    pub fn coeffs(&self) -> [f64; 4] {
        self.coeffs
    }

    #[inline]
    pub fn evaluate(&self, q: &TorusPoint) -> f64 {
        self.eval_raw(&q.coords())
    }

    /// Evaluate at an unnormalized angle triple (φ is 2π-periodic).
    #[inline]
    pub fn eval_raw(&self, q: &[f64; 3]) -> f64 {
        let [a0, a1, a2, a3] = self.coeffs;
        let mut v = a0;
        if a1 != 0.0 {
            v += a1 * q[0].cos();
        }
        if a2 != 0.0 {
            v += a2 * q[1].cos();
        }
        if a3 != 0.0 {
            v += a3 * q[2].cos();
        }
        v
    }

    pub fn value_at_zero(&self) -> f64 {
        self.value_at_zero
    }

    /// ∫ φ² over the torus, from cosine orthogonality.
    pub fn l2_norm_sq(&self) -> f64 {
        self.l2_norm_sq
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs[1..].iter().all(|&a| a == 0.0)
    }

    pub fn check_evenness(&self, n_samples: usize) -> bool {
        check_evenness(|q| self.evaluate(q), n_samples, 0x5eed)
    }
}

impl fmt::Display for FormFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:?}", self.kind.as_str(), self.serialized_coeffs())
    }
}

/// True iff |f(q) − f(−q)| ≤ 1e-13 at `n_samples` seeded random points.
pub fn check_evenness<F: Fn(&TorusPoint) -> f64>(f: F, n_samples: usize, seed: u64) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pi = std::f64::consts::PI;
    (0..n_samples.max(1)).all(|_| {
        let q = TorusPoint::new(rng.random_range(-pi..pi), rng.random_range(-pi..pi), rng.random_range(-pi..pi));
        (f(&q) - f(&-q)).abs() <= 1e-13
    })
}
