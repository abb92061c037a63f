//! Soft-edge eigenvalue processes of the beta-Hermite tridiagonal ensemble and
//! the stochastic Airy operator on shifted domains.
//!
//! The crate has two computational halves joined by one tridiagonal
//! eigensolver:
//!
//! * the matrix side samples the tridiagonal beta-Hermite model, extracts
//!   trailing minors, and tracks the centered/scaled lowest eigenvalues as the
//!   number of removed rows grows (`ensemble`, `minors`);
//! * the operator side discretizes `-d²/dx² + x + (2/√β) b'` on `[t, L]` with
//!   Dirichlet ends, every left shift `t` reusing the same Brownian increments
//!   (`sao`).
//!
//! `stats` supplies the distributional test kit (incomplete gamma/beta,
//! Kolmogorov-Smirnov, moments, bootstrap) and `verify` bundles the full
//! acceptance checklist run by the `airyedge verify` subcommand and the
//! acceptance test suite.

// Validation uses `!(x > 0.0)` on purpose: the negation also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ensemble;
pub mod error;
pub mod minors;
pub mod randvar;
pub mod sao;
pub mod stats;
pub mod tridiag;
pub mod verify;

pub use error::{Error, Result};
