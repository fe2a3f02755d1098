//! Error types shared across the crate.

use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the special-function routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecialError {
    #[error("{func}: pole at {at}")]
    Pole { func: &'static str, at: String },
    #[error("{func}: domain error: {detail}")]
    Domain { func: &'static str, detail: String },
    #[error("{func}: argument outside supported region: {detail}")]
    Range { func: &'static str, detail: String },
}

/// Errors raised by the quadrature routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("invalid integration request: {0}")]
    Invalid(String),
    #[error("integrand is not finite at x = {abscissa:e}")]
    NonFinite { abscissa: f64 },
    #[error(
        "panel budget of {panels} exhausted: partial value {partial}, error estimate {error_estimate:e}"
    )]
    Convergence {
        partial: Complex64,
        error_estimate: f64,
        panels: usize,
    },
    #[error("real-line truncation did not settle after doubling the radius to {radius:e}")]
    Divergence { radius: f64 },
}

/// Errors raised by the integer arithmetic routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ArithError {
    #[error("arithmetic domain error: {0}")]
    Domain(String),
    #[error("resource limit: {0}")]
    Resource(String),
}

/// Errors raised while loading or validating spectral data.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("form {form}: rule '{rule}' violated: {detail}")]
    Invariant {
        form: usize,
        rule: &'static str,
        detail: String,
    },
    #[error("dataset rule '{rule}' violated: {detail}")]
    Dataset { rule: &'static str, detail: String },
    #[error("form {form}: missing {what}")]
    Missing { form: usize, what: String },
    #[error("{0}")]
    Empty(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Crate-level error.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Special(#[from] SpecialError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    /// True for failures of a numerical procedure to converge (as opposed to bad input).
    pub fn is_convergence(&self) -> bool {
        matches!(
            self,
            Error::Quad(QuadError::Convergence { .. }) | Error::Quad(QuadError::Divergence { .. })
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
