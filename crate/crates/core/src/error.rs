use thiserror::Error;

/// Errors raised by series arithmetic, transform evaluation and the
/// membership analyses.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("series centers differ: {left} vs {right}")]
    CenterMismatch { left: f64, right: f64 },

    #[error("leading coefficient {leading} is too close to zero to invert")]
    NearSingular { leading: f64 },

    #[error("{op} requires a positive leading coefficient, got {leading}")]
    NonPositiveLeading { op: &'static str, leading: f64 },

    #[error("{op} produced a non-finite coefficient at index {index}")]
    NonFinite { op: &'static str, index: usize },

    #[error("derivative extraction is capped at order {cap}, requested {order}")]
    DerivativeCap { order: usize, cap: usize },

    #[error("{0}")]
    InvalidParameter(String),

    #[error("unknown family '{0}'")]
    UnknownFamily(String),

    #[error("not a valid transform: pmf coefficient {index} is {value}")]
    InvalidLst { index: usize, value: f64 },

    #[error("pmf mass {sum} exceeds one")]
    MassExceeded { sum: f64 },

    #[error("p_0 = {p0} is numerically zero")]
    DegenerateP0 { p0: f64 },

    #[error("phi(lambda) = {phi} is numerically one: mixing law is degenerate at zero")]
    DegenerateAtZero { phi: f64 },

    #[error("precondition not met: {0}")]
    PreconditionNotMet(String),

    #[error("invalid bracket: {0}")]
    InvalidBracket(String),

    #[error("p = {p} is not admissible for the {family} semigroup")]
    InadmissibleP { family: &'static str, p: f64 },

    #[error("negative entry {value} at index {index}")]
    NegativeInput { index: usize, value: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
