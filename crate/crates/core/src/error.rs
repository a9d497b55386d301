use thiserror::Error;

/// Errors raised by the algebra, calculus and geometry layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("mode count {n} outside supported range 1..={max}")]
    ModeCount { n: usize, max: usize },

    #[error("elements belong to different algebras (n = {0} and n = {1})")]
    ContextMismatch(usize, usize),

    #[error("generator index {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("expected {expected} coefficients, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("expected {expected} vector field components, got {got}")]
    FieldArity { expected: usize, got: usize },

    #[error("matrix is not in the Clifford algebra (residual {0:e})")]
    NotInAlgebra(f64),

    #[error("element is not self-adjoint (residual {0:e})")]
    NotSelfAdjoint(f64),

    #[error("element has nonzero trace (|tau| = {0:e})")]
    NonZeroTrace(f64),

    #[error("not a density: {0}")]
    NotDensity(String),

    #[error("spectrum not strictly positive (min eigenvalue {0:e})")]
    NotStrictlyPositive(f64),

    #[error("{func} is undefined at spectral value {value:e}")]
    Domain { func: &'static str, value: f64 },

    #[error("mean arguments must be strictly positive, got {0:e}")]
    NonPositiveArgument(f64),

    #[error("Onsager matrix is ill-conditioned (condition number {0:e})")]
    IllConditioned(f64),

    #[error("trajectory left the interior at t = {t} (min eigenvalue {min_eig:e})")]
    LeftInterior { t: f64, min_eig: f64 },

    #[error("ODE step size underflow at t = {0}")]
    StepSizeUnderflow(f64),

    #[error("Newton iteration did not converge after {iterations} iterations (best residual {residual:e})")]
    NewtonFailed { iterations: usize, residual: f64 },

    #[error("{what} out of range: {value}")]
    OutOfRange { what: &'static str, value: f64 },

    #[error("invalid element file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
