//! Moments of normalized volumes of random symmetric polytopes in convex
//! bodies: exact closed forms, quadrature of reduction formulas, seeded Monte
//! Carlo estimation, and shape movements along which these moments are convex.

// Negated comparisons are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bodies;
pub mod error;
pub mod exact;
pub mod montecarlo;
pub mod movements;
pub mod quadrature;
pub mod rng;

pub use error::{Error, Result};
