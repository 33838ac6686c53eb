use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix or vector contains a non-finite entry")]
    NonFinite,

    #[error("numerical column rank {rank} is below the column count {cols}")]
    RankDeficient { rank: usize, cols: usize },

    #[error("simplex pivot limit of {limit} iterations exceeded")]
    NumericalFailure { limit: usize },

    #[error("malformed linear program: {0}")]
    InvalidProgram(String),

    #[error("degree {d} exceeds right-node count {m}")]
    InvalidDegree { d: usize, m: usize },

    #[error("perturbation magnitude {0} is outside (0, 1)")]
    InvalidEpsilon(f64),

    #[error("expansion parameter {0} is outside the admissible range")]
    InvalidEps(f64),

    #[error("enumeration needs {required} subsets, above the limit of {limit}")]
    TooLarge { required: u128, limit: u128 },

    #[error("column sums are not constant (spread {spread:e})")]
    NotConstantColumnSum { spread: f64 },

    #[error("left-node index {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("measurements are not in the cone of the matrix columns")]
    Infeasible,

    #[error("only {found} zero measurements, at least {required} expected")]
    InsufficientZeros { found: usize, required: usize },

    #[error("no columns survive the split but the remaining measurements are nonzero")]
    DegenerateSplit,

    #[error("argument {0} is outside the function's domain")]
    OutOfDomain(f64),

    #[error("no mu in (0, beta) satisfies the degree inequality")]
    NoFeasibleMu,

    #[error("no alpha in (0, 1) keeps the exponent negative")]
    NoFeasibleAlpha,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
