//! Points of the three-dimensional torus, identified with the cell (-π, π]³.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Map a real angle into (-π, π].
pub fn wrap_angle(x: f64) -> f64 {
    if x > -PI && x <= PI {
        return x;
    }
    let r = x.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// A lattice momentum in the fundamental cell (-π, π]³.
///
/// Every constructor and arithmetic operation renormalizes into the cell,
/// so shifted momenta such as `q + p/2` never leave it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint([f64; 3]);

impl TorusPoint {
    pub const ZERO: TorusPoint = TorusPoint([0.0; 3]);
    /// The corner R = (π, π, π), where the essential spectrum collapses to a point.
    pub const CORNER: TorusPoint = TorusPoint([PI; 3]);

    pub fn new(x1: f64, x2: f64, x3: f64) -> Self {
        Self([wrap_angle(x1), wrap_angle(x2), wrap_angle(x3)])
    }

    pub fn from_array(x: [f64; 3]) -> Self {
        Self::new(x[0], x[1], x[2])
    }

    #[inline]
    pub fn coords(&self) -> [f64; 3] {
        self.0
    }

    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    /// Euclidean norm of the cell representative.
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Componentwise half of the cell representative, p/2 ∈ (-π/2, π/2].
    pub fn half(&self) -> TorusPoint {
        Self([self.0[0] / 2.0, self.0[1] / 2.0, self.0[2] / 2.0])
    }

    /// Axes on which the component sits exactly on the cell boundary π.
    pub fn boundary_axes(&self) -> [bool; 3] {
        [self.0[0] == PI, self.0[1] == PI, self.0[2] == PI]
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0.0; 3]
    }
}

impl Add for TorusPoint {
    type Output = TorusPoint;
    fn add(self, rhs: TorusPoint) -> TorusPoint {
        TorusPoint::new(self.0[0] + rhs.0[0], self.0[1] + rhs.0[1], self.0[2] + rhs.0[2])
    }
}

impl Sub for TorusPoint {
    type Output = TorusPoint;
    fn sub(self, rhs: TorusPoint) -> TorusPoint {
        TorusPoint::new(self.0[0] - rhs.0[0], self.0[1] - rhs.0[1], self.0[2] - rhs.0[2])
    }
}

impl Neg for TorusPoint {
    type Output = TorusPoint;
    fn neg(self) -> TorusPoint {
        TorusPoint::new(-self.0[0], -self.0[1], -self.0[2])
    }
}

impl Mul<TorusPoint> for f64 {
    type Output = TorusPoint;
    fn mul(self, rhs: TorusPoint) -> TorusPoint {
        TorusPoint::new(self * rhs.0[0], self * rhs.0[1], self * rhs.0[2])
    }
}

impl From<[f64; 3]> for TorusPoint {
    fn from(x: [f64; 3]) -> Self {
        Self::from_array(x)
    }
}

impl fmt::Display for TorusPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.0[0], self.0[1], self.0[2])
    }
}
