use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Operands disagree on variables, cap or shape.
    #[error("structural mismatch: {0}")]
    Structural(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("series is not a unit: zero constant term")]
    NotAUnit,
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("insufficient truncation degree: {0}")]
    InsufficientCap(String),
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("defining function {index} does not vanish at the origin")]
    BasePoint { index: usize },
    #[error("not generic: d_w rho(0,0) has rank {rank} < codimension {codim}")]
    NotGeneric { rank: usize, codim: usize },
    #[error("defining function {index} is not real: rho(z,w) != conj(rho)(w,z)")]
    Reality { index: usize },
    #[error("degenerate chart: {0}")]
    DegenerateChart(String),
    #[error("degenerate map: {0}")]
    DegenerateMap(String),
    #[error("consistency check failed: {0}")]
    Consistency(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn structural(msg: impl Into<String>) -> Self {
        Error::Structural(msg.into())
    }

    pub(crate) fn cap(msg: impl Into<String>) -> Self {
        Error::InsufficientCap(msg.into())
    }

    /// True for errors caused by malformed or invalid input files.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::BasePoint { .. }
                | Error::NotGeneric { .. }
                | Error::Reality { .. }
                | Error::DegenerateChart(_)
                | Error::Io { .. }
                | Error::UnknownVariable(_)
        )
    }
}
