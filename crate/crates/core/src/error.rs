use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// Payloads are stored as `f64` regardless of the scalar type used for the
/// computation so that messages stay readable.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("log-gamma requires a positive argument, got {0}")]
    NonPositiveArgument(f64),

    #[error("{what} = {value} outside the admissible range {range}")]
    OutOfRange {
        what: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("gamma argument {argument} is not positive (pole or negative argument)")]
    PoleOrNegativeArgument { argument: f64 },

    #[error("dimension n = {n} must exceed 2s = {two_s}")]
    DimensionTooSmall { n: u32, two_s: f64 },

    #[error("p = {p} is not Sobolev supercritical (p_S = {p_sobolev})")]
    NotSupercritical { p: f64, p_sobolev: f64 },

    #[error("kernel diverges at c = {c}: exceeds 1 - cutoff = {limit}")]
    SingularEvaluation { c: f64, limit: f64 },

    #[error("integral does not converge: {0}")]
    NonConvergent(String),

    #[error("order s = {0} unsupported here (requires 0 < s < 1)")]
    UnsupportedOrder(f64),

    #[error("boundary data has no tail model and the truncation estimate {estimate:e} exceeds {tolerance:e}")]
    TailUnspecified { estimate: f64, tolerance: f64 },

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("extrapolation unstable: successive estimates differ by {spread:e}")]
    ExtrapolationUnstable { spread: f64 },

    #[error("dimension n = {0} unsupported (spectral oracle supports n = 1 or 3)")]
    UnsupportedDimension(u32),

    #[error("spectral tail {tail:e} exceeds the allowed fraction of total mass {mass:e}")]
    AliasingDetected { tail: f64, mass: f64 },

    #[error("rescaled point ({r}, {y}) leaves the sampled domain and no far-field model is declared")]
    DomainExceeded { r: f64, y: f64 },

    #[error("dimension condition violated: n = {lhs} is not greater than {rhs}")]
    DimensionConditionViolated { lhs: f64, rhs: f64 },

    #[error("cut-off decay m = {m} must exceed n/2 = {half_n}")]
    NonIntegrable { m: f64, half_n: f64 },

    #[error("scaling exponent vanishes (logarithmic case)")]
    ExponentZero,

    #[error("quadrature failed to reach tolerance: {0}")]
    QuadratureFailed(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        if e.is_io_error() {
            Error::Io(e.to_string())
        } else {
            Error::Parse(e.to_string())
        }
    }
}
