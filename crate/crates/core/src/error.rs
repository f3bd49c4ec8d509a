use thiserror::Error;

/// Errors raised by the solver and its building blocks.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("input must be strictly positive")]
    NonPositiveInput,

    #[error("transform matrix is singular")]
    SingularTransform,
    #[error("transform stack is empty")]
    EmptyStack,
    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),

    #[error("matrix does not have full column rank")]
    RankDeficient,
    #[error("vector is not primitive (gcd of entries is {0})")]
    NotPrimitive(String),
    #[error("zero vector")]
    ZeroVector,
    #[error("width direction is the zero vector")]
    ZeroDirection,

    #[error("requested {requested} test points, need at least {minimum}")]
    CountTooSmall { requested: usize, minimum: usize },
    #[error("requested {requested} test points, cap is {cap}")]
    CapExceeded { requested: usize, cap: usize },
    #[error("dimension {0} is too large for exact hull enumeration")]
    DimensionTooLarge(usize),
    #[error("origin is not in the interior of the hull")]
    OriginOutsideHull,
    #[error("cut vector is zero")]
    ZeroCutVector,
    #[error("ellipsoid iteration budget of {0} steps exceeded")]
    IterationBudgetExceeded(usize),

    #[error("invalid ellipsoid: {0}")]
    InvalidEllipsoid(String),
    #[error("square root accuracy budget cannot be met")]
    InternalRootBudget,
    #[error("no nonzero gradient found on a line where the polynomial is not constant; input is not quasiconvex")]
    NonQuasiconvex,

    #[error("a bound (radius) is required for this problem")]
    MissingBound,
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
