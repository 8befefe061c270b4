use std::fmt;

/// Errors raised across the toolkit.
#[derive(Debug)]
pub enum Error {
    /// Every entry of the matrix is below the absolute floor.
    ZeroMatrix,
    /// The columns indexed by `support` are numerically linearly dependent.
    RankDeficientSupport { support: Vec<usize> },
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    InvalidArgument(String),
    NonFinite,
    NonIntegerAperture(f64),
    /// An exhaustive enumeration would exceed its budget.
    TooLarge { required: u128, budget: u64 },
    NotEnoughCandidates { needed: usize, available: usize },
    InfiniteMargin,
    DegenerateDenominator,
    OirTooLarge(f64),
    /// No branch count satisfies the certificate at the given tree level.
    Infeasible { level: usize },
    CardinalityMismatch { estimated: usize, truth: usize },
    Parse { line: usize, message: String },
    Io(std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ZeroMatrix => write!(f, "matrix is numerically zero"),
            Error::RankDeficientSupport { support } => {
                write!(f, "columns {support:?} are numerically rank deficient")
            }
            Error::DimensionMismatch {
                what,
                expected,
                found,
            } => write!(f, "{what}: expected {expected}, found {found}"),
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::NonFinite => write!(f, "matrix contains NaN or infinite entries"),
            Error::NonIntegerAperture(z) => {
                write!(f, "aperture must be a positive integer, got {z}")
            }
            Error::TooLarge { required, budget } => write!(
                f,
                "enumeration needs {required} evaluations, budget is {budget}"
            ),
            Error::NotEnoughCandidates { needed, available } => write!(
                f,
                "need {needed} candidate atoms but only {available} are available"
            ),
            Error::InfiniteMargin => write!(f, "in-support scores vanish, margin is infinite"),
            Error::DegenerateDenominator => {
                write!(f, "in-support energy is zero, ratio is undefined")
            }
            Error::OirTooLarge(v) => write!(f, "energy ratio {v} must be below 1"),
            Error::Infeasible { level } => {
                write!(f, "no branch count satisfies the condition at level {level}")
            }
            Error::CardinalityMismatch { estimated, truth } => write!(
                f,
                "estimated support has {estimated} indices, truth has {truth}"
            ),
            Error::Parse { line, message } => write!(f, "line {line}: {message}"),
            Error::Io(err) => write!(f, "{err}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(err) => Some(err),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err)
    }
}
