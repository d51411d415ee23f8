//! Exact homological algebra for mirror symmetry on tori: Novikov series,
//! A∞ structures and their transfer, Morse and affine Fukaya categories,
//! theta functions, and numerical Legendre duality.

pub mod ainfty;
pub mod corpus;
pub mod fukaya_oh;
pub mod interval;
pub mod mirror;
pub mod monge;
pub mod morse;
pub mod novikov;
pub mod rational;
pub mod scalar;
pub mod transfer;
pub mod trees;

pub use ainfty::{AInftyMorphismData, AInftyStructure, GradedBasis, MultilinearOp};
pub use novikov::{NovikovElem, NovikovError, Valuation};
pub use rational::{QMatrix, Q};
pub use scalar::Scalar;
pub use trees::PlanarTree;
