use std::fmt;

use thiserror::Error;

/// One reason a Lévy triplet was rejected.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// The price driver puts jump mass on `]-inf, -1]`, so `1 + z <= 0` can occur.
    MassBelowMinusOne { mass: f64, region: String },
    /// A scalar field is outside its admissible range.
    Field { name: &'static str, value: f64, constraint: &'static str },
    /// The jump-size law itself is malformed.
    Law(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MassBelowMinusOne { mass, region } => write!(
                f,
                "mass {mass} at z <= -1 ({region}); the price driver needs Pi(]-inf,-1]) = 0 for a positive price"
            ),
            Violation::Field { name, value, constraint } => {
                write!(f, "{name} = {value} violates {constraint}")
            }
            Violation::Law(msg) => write!(f, "{msg}"),
        }
    }
}

/// Every violation found in one pass, not just the first.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Violations(pub Vec<Violation>);

impl fmt::Display for Violations {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {driver} triplet: {violations}")]
    InvalidTriplet { driver: &'static str, violations: Violations },

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("non-positive Doleans factor 1 + z = {factor} at jump z = {jump}")]
    NonPositiveFactor { jump: f64, factor: f64 },

    #[error("non-monotone stencil at row {row}: lower = {lower}, upper = {upper}")]
    NonMonotone { row: usize, lower: f64, upper: f64 },

    #[error("explicit jump step violates Δt·λ <= 1 even with {substeps} sub-steps (λ = {intensity})")]
    Cfl { substeps: usize, intensity: f64 },

    #[error("tridiagonal solve failed at row {row} (pivot {pivot})")]
    LinearSolve { row: usize, pivot: f64 },

    #[error("solution value {value} at (t = {t}, u = {u}) left [0, 1]")]
    Range { t: f64, u: f64, value: f64 },

    #[error("configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidArgument { name, reason: reason.into() }
}
