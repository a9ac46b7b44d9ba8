use thiserror::Error;

/// Every failure the library can report.
///
/// Variants are coarse on purpose: callers across the C boundary see only the
/// discriminant (see [`Error::code`]), while Rust callers also get the message.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not irreducible")]
    NotIrreducible,
    #[error("iteration did not converge after {0} steps")]
    NoConvergence(usize),
    #[error("cut is empty")]
    EmptyCut,
    #[error("cut contains every vertex")]
    FullCut,
    #[error("dimension {n} exceeds the enumeration limit {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("second eigenvalue has real part 1; the gap is degenerate")]
    DegenerateGap,
    #[error("second singular value is 1; the bound is degenerate")]
    DegenerateSigma,
    #[error("matrix is not reversible")]
    NotReversible,
    #[error("{0} is not a perfect square")]
    NotPerfectSquare(usize),
    #[error("{0} is not an odd prime")]
    NotPrime(usize),
    #[error("decimal precision exhausted: residual {0:e}")]
    PrecisionExhausted(f64),
    #[error("eliminated block is singular")]
    SingularBlock,
    #[error("boundary values are proportional to the Perron vector")]
    DegenerateBoundary,
    #[error("clumped matrix is singular")]
    SingularClump,
    #[error("symmetric part is not positive definite")]
    NotPDSymPart,
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("missing path for pair ({0}, {1})")]
    MissingPair(usize, usize),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("mixing time exceeds the cap of {0} steps")]
    CapExceeded(usize),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable numeric code, shared with the C ABI.
    pub fn code(&self) -> i32 {
        match self {
            Error::NotIrreducible => 1,
            Error::NoConvergence(_) => 2,
            Error::EmptyCut => 3,
            Error::FullCut => 4,
            Error::TooLarge { .. } => 5,
            Error::DegenerateGap => 6,
            Error::DegenerateSigma => 7,
            Error::NotReversible => 8,
            Error::NotPerfectSquare(_) => 9,
            Error::NotPrime(_) => 10,
            Error::PrecisionExhausted(_) => 11,
            Error::SingularBlock => 12,
            Error::DegenerateBoundary => 13,
            Error::SingularClump => 14,
            Error::NotPDSymPart => 15,
            Error::InvalidPath(_) => 16,
            Error::MissingPair(..) => 17,
            Error::ShapeMismatch(_) => 18,
            Error::OutOfRange(_) => 19,
            Error::CapExceeded(_) => 20,
            Error::Parse(_) => 21,
            Error::Io(_) => 22,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
