//! Finite-horizon ruin problems for an insurer investing its reserve in a
//! risky asset. The reserve solves `dX = X_- dR + dP` for two independent
//! Lévy processes `R` (investment return) and `P` (business activity).
//!
//! The crate provides:
//! - [`levy`]: triplets, validation, increment sampling;
//! - [`reserve`]: path simulation and ruin detection;
//! - [`mc`]: Monte Carlo estimates of `Ψ(t,u) = E V(X_τ) 1{τ<T}` and the
//!   stopped-process consistency check;
//! - [`pide`]: a monotone IMEX finite-difference solver for `Ψ_t + LΨ = 0`;
//! - [`generator`]: the operator `L` applied to smooth test functions;
//! - [`viscosity`]: jet-based sub/supersolution checks of candidate fields;
//! - [`oracles`]: closed forms and an independent fine-step simulator;
//! - [`config`] and [`compare`]: run configuration and the MC/PIDE comparison.

// `!(x > 0.0)` is used on purpose throughout: it rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod compare;
pub mod config;
pub mod error;
pub mod generator;
pub mod levy;
pub mod mc;
pub mod numeric;
pub mod oracles;
pub mod pide;
pub mod reserve;
pub mod viscosity;

pub use compare::{run_compare, CompareReport, CompareRow};
pub use config::{parse_config, RunConfig};
pub use error::{Error, Result};
pub use levy::{Atom, Increment, JumpLaw, JumpSign, JumpSpec, LevyTriplet, ModelParams, PayoffSpec, Penalty};
pub use mc::{dynkin_check, estimate_psi, DynkinReport, RuinEstimate};
pub use numeric::PathStreams;
pub use pide::{solve_backward, solve_ruin, BoundaryData, Grid, SolutionField};
pub use reserve::{EventKind, SamplePath, SchemeKind, SimScheme};
