//! Cheng–Yau type operators `□f = Σ φ_ij f_ij` on compact manifolds:
//! curvature and Bochner-identity oracles, finite-element spectra, and
//! closed-form first-eigenvalue lower bounds.

// `!(x > 0.0)` is used on purpose so NaN fails the check too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod boxop;
pub mod discretize;
pub mod geometry;
pub mod hypersurface;
pub mod jet;
pub mod descriptor;
pub mod spectral;
pub mod bounds;
pub mod harness;

pub use error::{Error, Result};
