//! Central values of quadratic twists of modular L-functions.
//!
//! The crate evaluates `L(k, f, chi_d)` for Hecke eigenforms `f` of weight
//! `2k` by smoothed sums, enumerates discriminant families, computes
//! short-interval first moments and second moments, and checks the
//! Waldspurger relation between half-integral weight coefficients and twisted
//! central values.

pub mod arith;
pub mod error;
pub mod forms;
pub mod lfunc;
pub mod moments;
pub mod numeric;
pub mod waldspurger;

pub use error::{Error, Result};
