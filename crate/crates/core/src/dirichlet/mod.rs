//! Finite Dirichlet spaces: weighted graphs with a vertex measure, their
//! generators, spectral calculus, heat semigroup and Dirichlet form.

mod form;
mod metric;
mod space;
mod spectral;

pub use form::{dirichlet_form, energy_measure, EnergyMeasure};
pub use metric::{Metric, EXHAUSTIVE_METRIC_CHECK};
pub use space::DirichletSpace;
pub use spectral::{SpectralDecomposition, DEFAULT_DENSE_CAP, ZERO_EIGENVALUE_TOLERANCE};
