//! Finite-scale machinery for sum-like relations
//! `(x, y) in E <=> sum_n psi_n(x(n), y(n)) < +inf` on product spaces.
//!
//! * [`model`]: coordinate moduli, families and the truncated sum.
//! * [`conditions`]: quasi-metric constants, modulus comparison, the
//!   small-terms/divergent-sum witness search, threshold relations, the
//!   trichotomy classifier and the Mazur–Orlicz linearity check.
//! * [`metrization`]: level sets, chain pseudo-metric and the sandwich
//!   certificate `B^-2 d^p <= psi <= B^2 d^p`.
//! * [`reductions`]: the explicit reduction maps with their finite
//!   inequalities.
//! * [`catalog`]: the piecewise counterexample modulus and standard families.

pub mod catalog;
pub mod conditions;
pub mod error;
pub mod format;
pub mod metrization;
pub mod model;
pub mod reductions;
mod union_find;

pub use error::{Error, Result};
pub use model::{
    finite_sum, FamilyDescription, FunctionSpec, ModulusSample, ModulusSpec, PiecewiseModulus,
    SumBreakdown, ToleranceConfig,
};
