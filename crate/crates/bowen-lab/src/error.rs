use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("duplicate edge id `{0}`")]
    DuplicateEdgeId(String),
    #[error("duplicate vertex id `{0}`")]
    DuplicateVertex(String),
    #[error("graph has no vertices")]
    EmptyVertexSet,
    #[error("epsilon {eps} outside the declared range [0, {max}]")]
    OutOfRangeEpsilon { eps: f64, max: f64 },
    #[error("exponent estimate unstable: slope drift {drift:.3e} across truncations")]
    ExponentUnstable { drift: f64 },
    #[error("convergence abscissa undetermined: {0}")]
    AbscissaUndetermined(String),
    #[error("tail bound {tail:.3e} exceeds tolerance {tol:.3e} at truncation {trunc}")]
    TailBoundExceeded { tail: f64, tol: f64, trunc: usize },
    #[error("series diverges: {0}")]
    SeriesDivergent(String),
    #[error("power iteration stalled after {iters} iterations (spread {spread:.3e})")]
    PowerIterationStalled { iters: usize, spread: f64 },
    #[error("leading eigenvalue is not numerically simple (separation {0:.3e})")]
    DegenerateLeadingEigenvalue(f64),
    #[error("pressure derivative {0} is not negative")]
    NonNegativeDerivative(f64),
    #[error("reduced resolvent shift is singular")]
    SingularShift,
    #[error("eigenfunctional has zero mass on the constant function")]
    ZeroMassNormalization,
    #[error("no sign change of the alpha residual on [0,1]")]
    NoRoot,
    #[error("no bracket found for the Bowen root after {0} expansions")]
    BracketNotFound(usize),
    #[error("pressure is infinite at s = {0}")]
    PressureInfinite(f64),
    #[error("s0 = {s0} does not exceed the threshold p({n}) = {p_n}")]
    AdmissibilityViolated { s0: f64, n: usize, p_n: f64 },
    #[error("denominator nu(h log|g|) = {0:.3e} is numerically zero")]
    DenominatorNearZero(f64),
    #[error("extrapolation uncertainty {uncertainty:.3e} exceeds tolerance {tol:.3e} for coefficient {k}")]
    GridTooCoarse { k: usize, uncertainty: f64, tol: f64 },
    #[error("residuals below {0:.1e}; order fit is meaningless")]
    ResidualUnderflow(f64),
    #[error("system is not strongly regular: {0}")]
    NotStronglyRegular(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
