//! Two-spin systems with external fields: exact partition functions, the
//! tree recursion and its fixed point, field-realizing gadgets, and
//! partition-function-preserving reductions.
//!
//! A system is given by an edge matrix `[[beta, 1], [1, gamma]]` and a field
//! per vertex weighting spin 0. Everything generic over the number type works
//! with `f64`, [`scalar::LogWeight`] and the exact [`scalar::Surd`].

// `!(a < b)` is used on purpose so that NaN inputs fail validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod construct;
pub mod error;
pub mod gadgets;
pub mod random;
pub mod recursion;
pub mod reductions;
pub mod scalar;
pub mod spin;

pub use error::{Error, Result};
