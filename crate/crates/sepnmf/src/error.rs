//! Error type shared by every module, with a stable mapping to CLI exit codes.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A file or config could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// An argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An iterative routine failed to converge or internal numerical state broke down.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Column selection collapsed before the requested number of picks.
    #[error("rank deficiency: only {found} of {requested} indices found before residual collapse")]
    RankDeficient { found: usize, requested: usize },

    /// A point set does not span the ambient space.
    #[error("degenerate point set: {0}")]
    Degenerate(String),

    /// A matrix that must be nonsingular is numerically singular.
    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the CLI: parse failures 2, argument errors 3,
    /// numerical failures 4, i/o errors 5.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) => 2,
            Error::InvalidArgument(_) => 3,
            Error::Numerical(_)
            | Error::RankDeficient { .. }
            | Error::Degenerate(_)
            | Error::Singular(_) => 4,
            Error::Io(_) => 5,
        }
    }
}
