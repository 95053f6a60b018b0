use thiserror::Error;

/// Error type shared across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported exponent tau = {0}: the singular branch requires tau <= 0")]
    UnsupportedExponent(f64),
    #[error("invalid quadratic coefficients: {0}")]
    InvalidCoefficients(String),
    #[error("nonpositive value encountered at an evaluated node ({0})")]
    NonpositiveField(String),
    #[error("sample leaves the domain: {0}")]
    OutOfDomain(String),
    #[error("singular exponent: 1 + tau = 0 at tau = {0}")]
    SingularExponent(f64),
    #[error("unsupported dimension n = {0}")]
    UnsupportedDimension(usize),
    #[error("solution touched down (positivity floor reached) at r = {0}")]
    TouchdownDetected(f64),
    #[error("iteration budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("no center value in the bracket achieves the boundary value (boundary data below the touchdown threshold)")]
    NoSolutionInBracket,
    #[error("logarithmic change of variables hit a sample at r = 0")]
    LogSingularity,
    #[error("Euler equation is non-oscillatory for mu = {0} <= 0")]
    NonOscillatory(f64),
    #[error("stencil touches an exterior node at index {0:?}")]
    MaskViolation(Vec<usize>),
    #[error("linear solve failed: {0}")]
    LinearSolveFailed(String),
    #[error("antitone bracket failed to contract: {0}")]
    BracketStalled(String),
    #[error("Newton line search stalled: {0}")]
    NewtonStalled(String),
    #[error("invalid range: {0}")]
    InvalidRange(String),
    #[error("cutoff is not C^2: {0}")]
    InvalidCutoff(String),
    #[error("theorem hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("sublevel set {{u <= {0}}} is empty")]
    EmptySublevelSet(f64),
    #[error("invalid Riesz kernel: {0}")]
    InvalidKernel(String),
    #[error("no positive solution on the truncated domain (h too small)")]
    NoPositiveSolution,
    #[error("eigenvalue solve did not converge: {0}")]
    EigenBudgetExceeded(String),
    #[error("invalid problem specification: {0}")]
    InvalidSpec(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
