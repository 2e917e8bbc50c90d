//! Variance-update diagnostics for large Gaussian (second-order) inferences.
//!
//! The crate is `no_std` and needs only `alloc`. It provides:
//!
//! - [`dense`]: reference implementations of the joint, nested and local
//!   variance updates on dense matrices,
//! - [`sparse`]: the GMRF path (sparse Cholesky, Takahashi selected inversion,
//!   `diag(A Ξ Aᵀ)` assembly touching only the entries it needs),
//! - [`diagnostics`]: bound verdicts and medal geometry,
//! - [`render`]: deterministic SVG output of a medal plot,
//! - [`synth`]: seeded lattice GMRF instances and fixed fixtures.
//!
//! All inputs are conditional on fixed (plugged-in) model parameters.

#![no_std]

extern crate alloc;

pub mod dense;
pub mod diagnostics;
mod error;
pub mod render;
pub mod sparse;
pub mod synth;

pub use error::{Error, Result};
