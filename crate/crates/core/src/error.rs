use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |M - M^dagger| = {0:e})")]
    NonHermitian(f64),
    #[error("eigensolver did not converge")]
    NoConvergence,
    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),
    #[error("trace is {0}, expected 1")]
    BadTrace(f64),
    #[error("state vector norm is {0}, expected 1")]
    BadNorm(f64),
    #[error("shape mismatch: {0}")]
    DimensionMismatch(String),
    #[error("bad dimension: {0}")]
    BadDimension(String),
    #[error("bad subsystem index {index} for {count} subsystems")]
    BadSubsystemIndex { index: usize, count: usize },
    #[error("invalid bipartition: {0}")]
    BadBipartition(String),
    #[error("rank {rank} exceeds dimension {dim}")]
    BadRank { rank: usize, dim: usize },
    #[error("coefficients do not form a density matrix: {0}")]
    InvalidCoefficients(Box<Error>),
    #[error("total dimension {0} exceeds the oracle limit of 16")]
    DimensionTooLarge(usize),
    #[error("Kraus operators are incomplete (residual {0:e})")]
    IncompleteChannel(f64),
    #[error("operator {0} is not incoherent")]
    NotIncoherentInput(usize),
    #[error("normalizer is singular (min diagonal {0:e})")]
    SingularNormalizer(f64),
    #[error("round {round} uses a coherent operator on party {party}")]
    IncoherenceViolation { round: usize, party: &'static str },
    #[error("invalid protocol: {0}")]
    BadProtocol(String),
    #[error("ensemble does not reproduce the reduced state (trace-norm gap {0:e})")]
    EnsembleMismatch(f64),
    #[error("state is not maximally correlated in the incoherent basis (stray weight {0:e})")]
    NotMaximallyCorrelated(f64),
    #[error("channel is not separable quantum-incoherent")]
    NotSqi,
    #[error("channel is not separable incoherent")]
    NotSi,
    #[error("internal consistency: {name} evaluated to {value:e}")]
    NegativeMeasure { name: &'static str, value: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
