use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    Asymmetric(f64),

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("matrix is singular")]
    Singular,

    #[error("determinant {0} is not 1")]
    NotUnitDeterminant(f64),

    #[error("integer matrix is not unimodular (det = {0})")]
    NotUnimodular(i128),

    #[error("integer overflow in exact arithmetic")]
    Overflow,

    #[error("dimension {n} unsupported: {reason}")]
    Unsupported { n: usize, reason: String },

    #[error("lattice enumeration exceeded {0} nodes")]
    EnumerationOverflow(usize),

    #[error("iteration cap {0} exceeded")]
    IterationCap(usize),

    #[error("finite differences inconsistent: Richardson disagreement {disagreement:e} exceeds {limit:e}")]
    FdInconsistent { disagreement: f64, limit: f64 },

    #[error("quadrature did not reach tolerance (estimate {estimate:e}, error {error:e})")]
    Quadrature { estimate: f64, error: f64 },

    #[error("spectral parameter outside the convergence region: {0}")]
    OutsideConvergence(String),

    #[error("guardrail exceeded: {0}")]
    Guardrail(String),

    #[error("matrix is not half-integral (residual {0:e})")]
    NotHalfIntegral(f64),

    #[error("field vanishes at a test point")]
    VanishingField,

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("inconclusive: {0}")]
    Inconclusive(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Numerical failures as opposed to malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::EnumerationOverflow(_)
                | Error::IterationCap(_)
                | Error::FdInconsistent { .. }
                | Error::Quadrature { .. }
                | Error::Guardrail(_)
                | Error::Overflow
                | Error::VanishingField
        )
    }
}
