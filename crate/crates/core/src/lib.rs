//! Numerical laboratory for the four-species current-current (Fermi) weak
//! interaction on truncated fermionic Fock spaces.
//!
//! The crate is organised bottom-up:
//!
//! * [`fock`] enumerates the truncated occupation basis and realises the
//!   creation/annihilation operators with their grading-group sign strings.
//! * [`model`] holds dispersions, interaction kernels and the sparse assembly of
//!   `H0`, `H_I` and `H = H0 + g H_I`.
//! * [`spectral`] provides the ground-state solver, spectral windows, threshold
//!   sets and the closed-form dilation commutators used in Mourre estimates.
//! * [`verify`] turns every quantitative statement about the model into a
//!   deterministic check returning a [`verify::CheckResult`].

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fock;
pub mod model;
pub mod random;
pub mod sparse;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use sparse::SparseOperator;
