//! Hyperbolic speeds of one-parameter semigroups of holomorphic self-maps of
//! the unit disk, studied through their Koenigs domains.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conformal;
pub mod domains;
pub mod error;
pub mod exec;
pub mod harmonic;
pub mod hyp;
pub mod qh;
pub mod quad;
pub mod runner;
pub mod semigroup;

pub use error::{Error, Result};
pub use exec::Exec;

/// A point of the complex plane.
pub type ComplexPoint = num_complex::Complex64;
