//! Numerical toolkit for low-lying zeros of level-1 Maass forms.
//!
//! The crate evaluates the terms of the Kuznetsov trace formula, the
//! Kloosterman sums feeding it, the explicit-formula expansions of the one-
//! and two-level densities, and the weight and test functions those
//! expansions are built from. Spectral data (eigenvalues, Hecke
//! coefficients, zeros) is ingested from files and validated, never computed.

pub mod arith;
pub mod data;
pub mod density;
pub mod error;
pub mod quadrature;
pub mod specfun;
pub mod testfun;
pub mod trace;

pub use error::{Error, Result};
pub use specfun::ComplexValue;
