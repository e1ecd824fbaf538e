//! Finite-volume solver for the degenerate elliptic extension problem
//! `LU + y^{-a} ∂_y(y^a ∂_y U) = 0` on `X × (0, Y)`, `U(·, 0) = f`, and the
//! weighted Neumann trace that recovers `(-L)^s f`.

mod field;
mod mesh;
mod solver;
mod trace;

pub use field::{ExtensionField, Provenance};
pub use mesh::{build_graded_mesh, default_grading, YMesh};
pub use solver::{
    solve_extension_pde, BlockFactor, ExtensionSolver, ExtensionSystem, SolveMethod, TopBc, CG_TOLERANCE,
    DIRECT_SOLVE_LIMIT,
};
pub use trace::{
    default_height, extension_form, first_cell_trace, hat_residuals, neumann_trace, weak_residual, TraceEstimate,
    TraceOptions, TraceSolver, DEFAULT_HEIGHT_FACTOR,
};
