//! Finite-difference solver for the backward equation `ψ_t + Lψ = 0` of the
//! ruin functional on `[0, T] × [0, u_max]`.

mod field;
mod grid;
mod solver;
pub mod stencil;

pub use field::{BoundaryData, RuinedValue, SolutionField};
pub use grid::Grid;
pub use solver::{
    differences_decrease, observed_orders, refine_and_compare, solve_backward, solve_backward_with, solve_ruin,
    RefinementLevel, SolverOptions,
};
pub use stencil::{build_stencil, JumpRow, OperatorStencil};
