//! Linear programming: problem representation and a bounded-variable simplex.

mod program;
mod simplex;

pub use program::{lp_feasibility_residual, LinearProgram, LpRow, RowSense};
pub(crate) use program::feasibility_residual_with_bounds;
pub use simplex::{
    solve_lp, Basis, BasisStatus, FactoredBasis, LpSolution, LpStatus, LpTolerances, SimplexOptions,
    SimplexSolver,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("malformed linear program: {0}")]
    Structural(String),
}
