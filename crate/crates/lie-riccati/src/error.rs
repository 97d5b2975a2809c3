//! Error vocabulary shared by every module.

use thiserror::Error;

/// Everything that can go wrong in this library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Two of the three reference solutions coincide (as projective points).
    #[error("degenerate triple: {detail}")]
    DegenerateTriple { detail: String },

    /// A scalar quantity is the point at infinity.
    #[error("value is infinite{}", node.map(|i| format!(" at node {i}")).unwrap_or_default())]
    PoleValue { node: Option<usize> },

    /// The adaptive integrator needed a step below the floor (blow-up in
    /// the current chart).
    #[error("step size underflow at t = {t}{}", ordering.as_deref().map(|o| format!(" (ordering {o})")).unwrap_or_default())]
    StepSizeUnderflow { t: f64, ordering: Option<String> },

    /// Evaluation was requested outside the declared domain.
    #[error("evaluation outside domain at t = {t}")]
    DomainExceeded { t: f64 },

    /// A coefficient that must stay nonzero crosses zero.
    #[error("required coefficient vanishes near t = {t}")]
    CoefficientVanishes { t: f64 },

    /// Initial data does not match what the operation requires.
    #[error("wrong initial data: {detail}")]
    WrongInitialData { detail: String },

    /// A logarithm argument was non-positive.
    #[error("non-positive log argument at node {node}")]
    LogDomain { node: usize },

    /// A matrix that must lie in SL(2,R) does not.
    #[error("matrix determinant {det} is not 1")]
    NonUnitDeterminant { det: f64 },

    /// A claimed particular solution fails its residual check.
    #[error("claimed solution has residual {residual:.3e} (tolerance {tolerance:.3e})")]
    SolutionMismatch { residual: f64, tolerance: f64 },

    /// A function and its derivative vanish together where that is not allowed.
    #[error("value and derivative both vanish at node {node}")]
    BothZero { node: usize },

    /// A trajectory passes through infinity where a finite chart is required.
    #[error("trajectory passes through infinity at node {node}")]
    PoleOnPath { node: usize },

    /// An initial-data pair is identically zero.
    #[error("initial data pair is (0, 0)")]
    ZeroData,

    /// Evaluation too close to a root of the Hermite polynomial.
    #[error("Hermite polynomial vanishes near xi = {xi}")]
    HermiteZero { xi: f64 },

    /// Evaluation too close to a zero of the odd-case denominator.
    #[error("denominator vanishes near xi = {xi}")]
    DenominatorZero { xi: f64 },

    /// The series start point for the confluent equation is invalid.
    #[error("series start requires y > 0, got {y}")]
    SeriesStartFailure { y: f64 },

    /// A spectral scan interval contains no eigenvalue.
    #[error("no eigenvalue discriminator change in [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    /// Malformed coefficient spec, table file, or grid description.
    #[error("parse error: {detail}")]
    Parse { detail: String },
}

impl Error {
    pub(crate) fn parse(detail: impl Into<String>) -> Self {
        Error::Parse {
            detail: detail.into(),
        }
    }

    pub(crate) fn degenerate(detail: impl Into<String>) -> Self {
        Error::DegenerateTriple {
            detail: detail.into(),
        }
    }

    pub(crate) fn wrong_initial_data(detail: impl Into<String>) -> Self {
        Error::WrongInitialData {
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
