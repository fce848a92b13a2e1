use thiserror::Error;

use crate::bifurcation::BifurcationError;
use crate::continuation::ContinuationError;
use crate::io::IoError;
use crate::network::NetworkError;
use crate::polydiag::PolydiagError;
use crate::symmetry::SymmetryError;

/// Crate-level error.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Polydiag(#[from] PolydiagError),
    #[error(transparent)]
    Symmetry(#[from] SymmetryError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Continuation(#[from] ContinuationError),
    #[error(transparent)]
    Bifurcation(#[from] BifurcationError),
    #[error(transparent)]
    Io(#[from] IoError),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit status: 1 for bad input, 2 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Polydiag(_) | Error::Symmetry(_) | Error::Io(_) => 1,
            Error::Network(NetworkError::NonFinite) => 2,
            Error::Network(_) => 1,
            Error::Bifurcation(BifurcationError::BadStart(_) | BifurcationError::MissingStart) => 1,
            Error::Bifurcation(_) | Error::Continuation(_) => 2,
        }
    }
}
