use thiserror::Error;

/// Everything that can go wrong in this crate.
///
/// State indices in messages are 0-based; the model file format is 1-based.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("EmptyRow({0}): state {0} has no image")]
    EmptyRow(usize),
    #[error("NotSquare: adjacency has {rows} rows but row {row} has {cols} entries")]
    NotSquare { rows: usize, row: usize, cols: usize },
    #[error("EmptyStateSpace: a correspondence needs at least one state")]
    EmptyStateSpace,
    #[error("IndexOutOfRange: index {index} is not below {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("NotSurjective({0}): state {0} has no preimage")]
    NotSurjective(usize),
    #[error("BudgetExceeded({count}): more than the allowed {budget} items")]
    BudgetExceeded { count: u128, budget: u128 },
    #[error("Overflow: orbit count does not fit in 128 bits")]
    Overflow,
    #[error("DisallowedEdge({0}, {1})")]
    DisallowedEdge(usize, usize),
    #[error("NonFinitePotential({0}, {1})")]
    NonFinitePotential(usize, usize),
    #[error("InvalidOrbit: {0}")]
    InvalidOrbit(String),
    #[error("DimensionMismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("NotStochastic: row {row} {reason}")]
    NotStochastic { row: usize, reason: String },
    #[error("NotProbability: {0}")]
    NotProbability(String),
    #[error("NotStationary: residual {residual:e} exceeds {tolerance:e}")]
    NotStationary { residual: f64, tolerance: f64 },
    #[error("SupportViolation({0}, {1}): positive mass on a disallowed edge")]
    SupportViolation(usize, usize),
    #[error("NoConvergence: {what} after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },
    #[error("DegenerateEigenvector: no entry above the support threshold")]
    DegenerateEigenvector,
    #[error("InsufficientData: {blocks} blocks, need at least {required}")]
    InsufficientData { blocks: usize, required: usize },
    #[error("NotPrimitive: adjacency matrix is not primitive")]
    NotPrimitive,
    #[error("SingularPotential: {0}")]
    SingularPotential(String),
    #[error("GridMismatch: density grids differ in bounds or resolution")]
    GridMismatch,
    #[error("InvalidParameter: {0}")]
    InvalidParameter(String),
    #[error("ParseError(line {line}): {reason}")]
    Parse { line: usize, reason: String },
}

impl Error {
    /// True for failures of an iterative numerical method, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. } | Error::DegenerateEigenvector | Error::Overflow
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
