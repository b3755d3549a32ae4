use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (defect {defect:e})")]
    NotHermitian { defect: f64 },
    #[error("matrix is not positive (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },
    #[error("trace {trace} differs from 1")]
    TraceMismatch { trace: f64 },

    #[error("duplicate observable name `{0}`")]
    DuplicateName(String),
    #[error("unknown observable `{0}`")]
    UnknownObservable(String),
    #[error("derivative callback disagrees with finite differences at point {point}: {detail}")]
    InconsistentDerivative { point: usize, detail: String },

    #[error("window too large for the contraction bound: 2*D0*window = {product}")]
    ContractionViolated { product: f64 },
    #[error("fixed-point iteration did not converge after {iterations} iterations (defect {defect:e})")]
    NoConvergence { iterations: usize, defect: f64 },
    #[error("trajectory covers [{start}, {end}] but [{lo}, {hi}] was requested")]
    InsufficientCoverage { start: f64, end: f64, lo: f64, hi: f64 },
    #[error("integration lost state validity at t = {time}: {reason}")]
    StepTooLarge { time: f64, reason: String },
    #[error("matrix is not unitary (defect {defect:e})")]
    NonUnitary { defect: f64 },
    #[error("basis is linearly dependent or empty")]
    DegenerateBasis,

    #[error("polytope has no vertices")]
    EmptyPolytope,
    #[error("functional is not a vertex of the polytope")]
    NotAVertex,
    #[error("ambient dimension {ambient} too small: need at least {required}")]
    AmbientTooSmall { ambient: usize, required: usize },
    #[error("exposedness certificate of added point {point} failed at step {step} (gap {gap:e})")]
    CertificateFailure { step: usize, point: usize, gap: f64 },
    #[error("sequence is not increasing at index {index} (residual {residual:e})")]
    NotIncreasing { index: usize, residual: f64 },
    #[error("linear program failed: {0}")]
    Lp(String),

    #[error("syntax error at position {position}: {message}")]
    SyntaxError { position: usize, message: String },
    #[error("Pauli terms act on different numbers of sites ({expected} and {found})")]
    MixedArity { expected: usize, found: usize },
    #[error("{path}: {message}")]
    Config { path: String, message: String },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
