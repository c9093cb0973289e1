use std::fmt;

/// Failure modes across the crate. Domain preconditions get their own
/// variants so callers can branch without string matching.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// An entry A^i_j was supplied with i >= j.
    NonTriangular { i: usize, j: usize },
    /// Stage count outside the supported range (1..=64).
    BadDimension { n: usize },
    /// Stage index outside 1..=n.
    IndexOutOfRange { index: usize, n: usize },
    /// Ring elements from different ambient matrices were combined.
    AmbientMismatch,
    /// stage_swap requested at j with A^j_{j+1} != 0.
    SwapObstructed { j: usize },
    /// bundle_change class u touches an index >= j.
    BadSupport { j: usize },
    /// bundle_change obstruction u(u - beta) is nonzero.
    ObstructionNonzero,
    /// Two matrices of different stage counts where equal ones are required.
    DimensionMismatch { left: usize, right: usize },
    /// Candidate endpoints do not line up for composition.
    EndpointMismatch,
    /// Operation requires a candidate that passed iso_check.
    Unverified,
    /// qtrivial_search called on a matrix that is not Q-trivial.
    NotQTrivial,
    /// Case classification requires well-ordered towers.
    NotWellOrdered,
    /// Case classification is only defined at stage 4.
    WrongStage { n: usize },
    /// A verified candidate whose third column fits none of the proven cases.
    UnmatchedForm(String),
    /// exceptional_automorphisms requires the alpha_4 = x_3 - alpha_3/2 pattern.
    WrongShape(String),
    /// A report file failed to parse or is internally inconsistent.
    CorruptReport(String),
    /// Malformed JSON input outside report files.
    Parse(String),
    /// Filesystem failure, flattened to a message for value semantics.
    Io(String),
    /// A condition the underlying mathematics guarantees failed to hold;
    /// this falsifies the implementation, not the input.
    InternalInvariantViolation(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonTriangular { i, j } => {
                write!(f, "entry at ({i},{j}) violates strict upper triangularity")
            }
            Error::BadDimension { n } => {
                write!(f, "stage count {n} outside supported range 1..=64")
            }
            Error::IndexOutOfRange { index, n } => {
                write!(f, "stage index {index} out of range for n={n}")
            }
            Error::AmbientMismatch => write!(f, "ring elements have different ambient matrices"),
            Error::SwapObstructed { j } => {
                write!(f, "stage swap at j={j} obstructed: A^j_(j+1) != 0")
            }
            Error::BadSupport { j } => {
                write!(
                    f,
                    "bundle change class must be supported on indices below {j}"
                )
            }
            Error::ObstructionNonzero => write!(f, "bundle change obstruction u(u - beta) != 0"),
            Error::DimensionMismatch { left, right } => {
                write!(f, "stage counts differ: {left} vs {right}")
            }
            Error::EndpointMismatch => write!(f, "candidate endpoints do not match"),
            Error::Unverified => write!(f, "candidate has not passed iso_check"),
            Error::NotQTrivial => write!(f, "matrix is not Q-trivial"),
            Error::NotWellOrdered => write!(f, "matrix is not well-ordered"),
            Error::WrongStage { n } => write!(f, "operation requires n=4, got n={n}"),
            Error::UnmatchedForm(d) => write!(f, "candidate fits no case: {d}"),
            Error::WrongShape(d) => write!(f, "matrix does not fit required pattern: {d}"),
            Error::CorruptReport(d) => write!(f, "corrupt report: {d}"),
            Error::Parse(d) => write!(f, "parse error: {d}"),
            Error::Io(d) => write!(f, "io error: {d}"),
            Error::InternalInvariantViolation(d) => {
                write!(f, "internal invariant violation: {d}")
            }
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable machine-readable code, used by the CLI error objects.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NonTriangular { .. } => "NonTriangular",
            Error::BadDimension { .. } => "BadDimension",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::AmbientMismatch => "AmbientMismatch",
            Error::SwapObstructed { .. } => "SwapObstructed",
            Error::BadSupport { .. } => "BadSupport",
            Error::ObstructionNonzero => "ObstructionNonzero",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::EndpointMismatch => "EndpointMismatch",
            Error::Unverified => "Unverified",
            Error::NotQTrivial => "NotQTrivial",
            Error::NotWellOrdered => "NotWellOrdered",
            Error::WrongStage { .. } => "WrongStage",
            Error::UnmatchedForm(_) => "UnmatchedForm",
            Error::WrongShape(_) => "WrongShape",
            Error::CorruptReport(_) => "CorruptReport",
            Error::Parse(_) => "Parse",
            Error::Io(_) => "Io",
            Error::InternalInvariantViolation(_) => "InternalInvariantViolation",
        }
    }
}
