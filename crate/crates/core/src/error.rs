use thiserror::Error;

use crate::dsl::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid subsystem: {0}")]
    InvalidSubsystem(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid argument: {0}")]
    InvalidArg(String),

    #[error("operator is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("operator is not an observable (anti-Hermitian part {deviation:.3e})")]
    NotObservable { deviation: f64 },

    #[error("incompatible noumenal states: {0}")]
    Incompatible(String),

    #[error("operations do not have commuting supports (commutator norm {norm:.3e})")]
    NonCommutingSupports { norm: f64 },

    #[error("projector does not commute with the foliated descriptors (commutator norm {norm:.3e})")]
    NonCommutingFoliation { norm: f64 },

    #[error("branch weight {weight:.3e} is not above tolerance")]
    ZeroWeightBranch { weight: f64 },

    #[error("branches do not belong to the same foliation: {0}")]
    MismatchedBranches(String),

    #[error("gate does not commute with the branching observable (commutator norm {norm:.3e})")]
    NonCommutingGate { norm: f64 },

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("line {line}: {source}")]
    AtLine {
        line: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn at_line(self, line: usize) -> Self {
        match self {
            e @ Error::AtLine { .. } => e,
            e => Error::AtLine {
                line,
                source: Box::new(e),
            },
        }
    }

    /// The innermost error, with any line context stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtLine { source, .. } => source.root(),
            e => e,
        }
    }
}
