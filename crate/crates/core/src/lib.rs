//! Numerical verification toolkit for the eigenvalue / singular-value
//! AM-GM family of matrix inequalities.
//!
//! The crate provides:
//!
//! - dense complex Hermitian eigendecomposition, SVD and matrix functions
//!   sized for desk-scale verification ([`linalg`]);
//! - the catalogue of inequality checks with per-index margins ([`suite`]);
//! - an executable, stage-by-stage reconstruction of the rank-reduction
//!   proof with invariant residuals ([`drury`]);
//! - seeded, reproducible instance generators ([`generate`]);
//! - a small textual language for spectral inequalities ([`dsl`]);
//! - a randomized counterexample search with resumable persistence
//!   ([`search`]);
//! - the JSON matrix file format shared by the CLI and the browser demo
//!   ([`matfile`]).

pub mod drury;
pub mod dsl;
pub mod error;
pub mod generate;
pub mod linalg;
pub mod matfile;
pub mod search;
pub mod suite;
pub mod tol;

pub use error::{Error, Result};
