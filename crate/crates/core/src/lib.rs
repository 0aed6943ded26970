//! Directional fractional calculus on convex domains.
//!
//! The crate discretizes the left/right directional fractional integrals
//! and derivatives along rays issued from a boundary point, the Kipriyanov
//! derivative, elliptic operators whose lowest-order term is that
//! derivative, and the spectral checks built on top of them: strict
//! accretivity, sector containment of the numerical range, and two-sided
//! eigenvalue bounds by constant-coefficient comparators.

pub mod assembly;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod fracops;
pub mod quadrature;
pub mod sparse;
pub mod spectral;
pub mod trial;

pub use error::{Error, Result};
pub use num_complex::Complex64;
