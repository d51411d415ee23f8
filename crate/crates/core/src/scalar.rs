//! The coefficient abstraction shared by the multilinear machinery.

use crate::rational::{q_from_json, q_to_json, Q};
use num_traits::{One, Zero};
use serde_json::Value;
use std::fmt::Debug;

/// A commutative ring of characteristic zero containing `Q`.
///
/// Implemented for exact rationals and for truncated Novikov series; the
/// A∞ code is written once against this trait.
pub trait Scalar: Clone + PartialEq + Debug + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn from_q(x: &Q) -> Self;
    fn to_json(&self) -> Value;
    fn from_json(v: &Value) -> Option<Self>;

    fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    fn from_i64(n: i64) -> Self {
        Self::from_q(&crate::rational::qi(n))
    }

    /// Multiplies by `(−1)^odd`.
    fn signed(&self, odd: bool) -> Self {
        if odd {
            self.neg()
        } else {
            self.clone()
        }
    }
}

impl Scalar for Q {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn from_q(x: &Q) -> Self {
        x.clone()
    }
    fn to_json(&self) -> Value {
        q_to_json(self)
    }
    fn from_json(v: &Value) -> Option<Self> {
        q_from_json(v)
    }
}
