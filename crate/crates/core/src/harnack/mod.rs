//! Experiments on the geometry of the product space `X × ℝ` with measure
//! `μ × |y|^a dy` and on Harnack inequalities for `(-L)^s`.
//!
//! Every experiment returns an [`ExperimentReport`]. Constants obtained by
//! maximizing over finitely many balls, functions or data sets are lower
//! bounds for the true suprema and are labelled as such.

mod balls;
mod boundary;
mod even;
mod intrinsic;
mod nonlocal;
mod product;
mod report;

pub use balls::{
    doubling_constant, poincare_constant, Ball, BallFamily, POINCARE_DILATION, POINCARE_EIGENFUNCTIONS, POINCARE_RANDOM,
};
pub use boundary::{boundary_harnack_experiment, grid_decomposition, BoundaryHarnackConfig, DomainShape, GridDomain};
pub use even::{even_extension_check, even_extension_study, hat_residuals};
pub use intrinsic::intrinsic_metric_bounds;
pub use nonlocal::{
    harnack_constant, nonlocal_dirichlet_solve, DataRefinement, HarnackConfig, NonlocalDirichlet, MAX_PRINCIPLE_SLACK,
};
pub use product::{build_product_space, ProductSpace};
pub use report::{ExperimentReport, RefinementStep, TrialRow, LOWER_BOUND};
