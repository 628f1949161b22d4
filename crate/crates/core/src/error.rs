//! Crate-wide error type.
//!
//! Every failure carries a stable machine-readable code (see [`Error::code`])
//! so frontends can emit `ERROR <code>: <detail>` lines without string
//! matching on messages.

use thiserror::Error;

/// Errors produced by chain validation, numerics, and simulation.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Input matrix is not square.
    #[error("matrix is {rows}x{cols}, expected square")]
    NonSquare { rows: usize, cols: usize },

    /// Matrix dimension does not match the state space or vector length.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// State space violates its invariants (size, finiteness, distinctness).
    #[error("invalid state space: {0}")]
    InvalidStateSpace(String),

    /// Probability vector violates its invariants.
    #[error("invalid probability vector: {0}")]
    InvalidProbVector(String),

    /// An off-diagonal rate is negative.
    #[error("negative off-diagonal rate q[{row}][{col}] = {value}")]
    NegativeOffDiagonal { row: usize, col: usize, value: f64 },

    /// A row of the generator does not sum to zero within tolerance.
    /// Reports the worst row and its residual.
    #[error("row {row} residual {residual:e}")]
    RowSumNonZero { row: usize, residual: f64 },

    /// The positive-rate graph is not strongly connected; `(from, to)` is a
    /// witness pair with no directed path.
    #[error("state {to} not reachable from state {from}")]
    NotIrreducible { from: usize, to: usize },

    /// The stationary linear system could not be solved. Unreachable for a
    /// validated irreducible generator; signals a numerical failure.
    #[error("stationary distribution solve failed: {0}")]
    SingularSystem(String),

    /// Two eigenvalues are closer than the relative gap threshold, so residue
    /// matrices would be ill-conditioned. Callers fall back to uniformization.
    #[error("eigenvalue gap {gap:e} below threshold {threshold:e}")]
    DegenerateSpectrum { gap: f64, threshold: f64 },

    /// The spectral matrix exponential produced an imaginary residue above
    /// the verification bound. Signals a decomposition bug.
    #[error("imaginary residue {max_imag:e} exceeds bound {bound:e}")]
    ImaginaryResidueTooLarge { max_imag: f64, bound: f64 },

    /// Uniformization horizon too large even after internal subdivision.
    #[error("uniformization rate-horizon product {lambda_tau:e} too large after {segments} segments")]
    OverflowHorizon { lambda_tau: f64, segments: usize },

    /// Sampler entered a state with no exit rate. Unreachable for a validated
    /// irreducible generator.
    #[error("state {state} has zero exit rate")]
    AbsorbingState { state: usize },

    /// Too few completed visits to extract a sojourn sequence.
    #[error("state {state} has {visits} completed sojourns, need at least 2")]
    InsufficientVisits { state: usize, visits: usize },

    /// No exponential mixture exists (degenerate spectrum); grid-based
    /// quantities remain available.
    #[error("mixture unavailable: degenerate spectrum")]
    MixtureUnavailable,

    /// State index outside `0..N`.
    #[error("state index {index} out of range for {n} states")]
    IndexOutOfRange { index: usize, n: usize },

    /// A scalar parameter violates its documented precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Model file did not parse or resolve.
    #[error("model parse failure: {0}")]
    ModelParse(String),

    /// An internal numeric check that should be unreachable on validated
    /// input failed.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

impl Error {
    /// Stable code used in frontend error lines.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NonSquare { .. } => "NonSquare",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::InvalidStateSpace(_) => "InvalidStateSpace",
            Error::InvalidProbVector(_) => "InvalidProbVector",
            Error::NegativeOffDiagonal { .. } => "NegativeOffDiagonal",
            Error::RowSumNonZero { .. } => "RowSumNonZero",
            Error::NotIrreducible { .. } => "NotIrreducible",
            Error::SingularSystem(_) => "SingularSystem",
            Error::DegenerateSpectrum { .. } => "DegenerateSpectrum",
            Error::ImaginaryResidueTooLarge { .. } => "ImaginaryResidueTooLarge",
            Error::OverflowHorizon { .. } => "OverflowHorizon",
            Error::AbsorbingState { .. } => "AbsorbingState",
            Error::InsufficientVisits { .. } => "InsufficientVisits",
            Error::MixtureUnavailable => "MixtureUnavailable",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::ModelParse(_) => "ModelParse",
            Error::NumericalFailure(_) => "NumericalFailure",
        }
    }

    /// True when the failure is numerical rather than an input problem.
    /// Frontends map these to a distinct exit status.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularSystem(_)
                | Error::DegenerateSpectrum { .. }
                | Error::ImaginaryResidueTooLarge { .. }
                | Error::OverflowHorizon { .. }
                | Error::MixtureUnavailable
                | Error::NumericalFailure(_)
        )
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
