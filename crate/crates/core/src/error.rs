use std::fmt;

/// Location of a problem inside a parsed text file (1-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Location {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("SVD iteration did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("column {0} is numerically zero after orthogonalization")]
    DegenerateColumn(usize),

    #[error(
        "theta = {theta:e} is within the guard band {guard:e} of singular value sigma_{index} = {sigma:e}"
    )]
    ThetaOnSingularValue {
        theta: f64,
        sigma: f64,
        index: usize,
        guard: f64,
    },

    #[error("backward error {backward_error:e} is within the guard band {guard:e} of theta = {theta:e}")]
    BackwardErrorOnTheta {
        theta: f64,
        backward_error: f64,
        guard: f64,
    },

    #[error("system is inconsistent (residual {residual:e})")]
    InconsistentSystem { residual: f64 },

    #[error("rank mismatch: {left} vs {right}")]
    RankMismatch { left: usize, right: usize },

    #[error("numerical rank is zero")]
    ZeroRank,

    #[error("right-hand side is zero")]
    ZeroRhs,

    #[error("augmented system is singular; the constraint basis does not complete the rank")]
    SingularAugmentedSystem,

    #[error("tolerance window is empty: |dA| = {da_norm:e} must stay below {limit:e}")]
    EmptyWindow { da_norm: f64, limit: f64 },

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("cannot compare an empty solution set with a nonempty one")]
    IncomparableDimensions,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("coordinate vector has length {got}, shape needs {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("operator failed the linearity probe (defect {defect:e} > {tolerance:e})")]
    NonlinearOperator { defect: f64, tolerance: f64 },

    #[error("parse error at {location}: {message}")]
    Parse { location: Location, message: String },

    #[error("row {row} has {got} entries, expected {expected}")]
    InconsistentRowLength {
        row: usize,
        expected: usize,
        got: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{0}")]
    Io(String),
}

impl Error {
    /// Stable identifier used on the command line and across the C ABI.
    pub fn name(&self) -> &'static str {
        match self {
            Error::NonFinite { .. } => "NonFinite",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::DegenerateColumn(_) => "DegenerateColumn",
            Error::ThetaOnSingularValue { .. } => "ThetaOnSingularValue",
            Error::BackwardErrorOnTheta { .. } => "BackwardErrorOnTheta",
            Error::InconsistentSystem { .. } => "InconsistentSystem",
            Error::RankMismatch { .. } => "RankMismatch",
            Error::ZeroRank => "ZeroRank",
            Error::ZeroRhs => "ZeroRhs",
            Error::SingularAugmentedSystem => "SingularAugmentedSystem",
            Error::EmptyWindow { .. } => "EmptyWindow",
            Error::HypothesisViolated(_) => "HypothesisViolated",
            Error::IncomparableDimensions => "IncomparableDimensions",
            Error::ShapeMismatch(_) => "ShapeMismatch",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::NonlinearOperator { .. } => "NonlinearOperator",
            Error::Parse { .. } => "ParseError",
            Error::InconsistentRowLength { .. } => "InconsistentRowLength",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Io(_) => "Io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
