use thiserror::Error;

/// Errors raised across the library.
///
/// Variants are grouped loosely into input-validation failures (bad graphs,
/// out-of-range parameters) and numerical failures (non-convergence,
/// singular systems). [`Error::is_validation`] tells them apart, which the
/// command-line front end uses to pick an exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("NonSymmetricConductance: w({u},{v}) = {forward} but w({v},{u}) = {backward}")]
    NonSymmetricConductance {
        u: String,
        v: String,
        forward: f64,
        backward: f64,
    },

    #[error("NonPositiveMeasure: vertex {vertex} has mu = {value}")]
    NonPositiveMeasure { vertex: String, value: f64 },

    #[error("MetricAxiomViolation: {0}")]
    MetricAxiomViolation(String),

    #[error("DuplicateVertex: {0}")]
    DuplicateVertex(String),

    #[error("UnknownVertex: {0}")]
    UnknownVertex(String),

    #[error("InvalidInput: {0}")]
    InvalidInput(String),

    #[error("ShapeMismatch: expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("TooLarge: {n} vertices exceeds the dense cap of {cap}")]
    TooLarge { n: usize, cap: usize },

    #[error("EigensolverNoConvergence: off-diagonal norm {off_norm:e} after {sweeps} sweeps")]
    EigensolverNoConvergence { sweeps: usize, off_norm: f64 },

    #[error("NegativeTime: t = {0}")]
    NegativeTime(f64),

    #[error("NonPositiveTime: t = {0}")]
    NonPositiveTime(f64),

    #[error("SOutOfRange: s = {0} must lie strictly inside (0, 1)")]
    SOutOfRange(f64),

    #[error("QuadratureNotConverged: error estimate {estimate:e} above tolerance {tolerance:e}")]
    QuadratureNotConverged { estimate: f64, tolerance: f64 },

    #[error("DisconnectedSpace: {components} connected components")]
    DisconnectedSpace { components: usize },

    #[error("WindowTooSmall: {0}")]
    WindowTooSmall(String),

    #[error("BadMeshParams: {0}")]
    BadMeshParams(String),

    #[error("CGNoConvergence: relative residual {residual:e} after {iterations} iterations")]
    CgNoConvergence { iterations: usize, residual: f64 },

    #[error("BadTopBC: {0}")]
    BadTopBc(String),

    #[error("MeshTooCoarse: extrapolation disagreement {disagreement:e} above {tolerance:e}")]
    MeshTooCoarse { disagreement: f64, tolerance: f64 },

    #[error("TestFunctionSupportViolation: {0}")]
    TestFunctionSupportViolation(String),

    #[error("RiccatiBlowup: step control failed at z = {z} for lambda = {lambda}")]
    RiccatiBlowup { lambda: f64, z: f64 },

    #[error("TruncationTooShort: psi shifted by {shift:e} when doubling the string length")]
    TruncationTooShort { shift: f64 },

    #[error("WeightNotIntegrable: {0}")]
    WeightNotIntegrable(String),

    #[error("NotConstantString")]
    NotConstantString,

    #[error("EmptyBall: center {center}, radius {radius}")]
    EmptyBall { center: usize, radius: f64 },

    #[error("DilationExceedsSpace: {0}")]
    DilationExceedsSpace(String),

    #[error("SupportViolation: {0}")]
    SupportViolation(String),

    #[error("SingularSystem: {0}")]
    SingularSystem(String),

    #[error("DegenerateProbe: {0}")]
    DegenerateProbe(String),

    #[error("InfeasibleCompetitor: energy density {density} exceeds 1")]
    InfeasibleCompetitor { density: f64 },

    #[error("FixtureMissing: {0}")]
    FixtureMissing(String),

    #[error("Io: {0}")]
    Io(#[from] std::io::Error),

    #[error("Json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("Parse: {0}")]
    Parse(String),
}

impl Error {
    /// True for errors caused by bad input rather than a numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::NonSymmetricConductance { .. }
                | Error::NonPositiveMeasure { .. }
                | Error::MetricAxiomViolation(_)
                | Error::DuplicateVertex(_)
                | Error::UnknownVertex(_)
                | Error::InvalidInput(_)
                | Error::ShapeMismatch { .. }
                | Error::TooLarge { .. }
                | Error::NegativeTime(_)
                | Error::NonPositiveTime(_)
                | Error::SOutOfRange(_)
                | Error::WindowTooSmall(_)
                | Error::BadMeshParams(_)
                | Error::BadTopBc(_)
                | Error::TestFunctionSupportViolation(_)
                | Error::WeightNotIntegrable(_)
                | Error::NotConstantString
                | Error::EmptyBall { .. }
                | Error::DilationExceedsSpace(_)
                | Error::SupportViolation(_)
                | Error::FixtureMissing(_)
                | Error::Io(_)
                | Error::Json(_)
                | Error::Parse(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_s(s: f64) -> Result<()> {
    if s > 0.0 && s < 1.0 {
        Ok(())
    } else {
        Err(Error::SOutOfRange(s))
    }
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::ShapeMismatch { expected, got })
    }
}
