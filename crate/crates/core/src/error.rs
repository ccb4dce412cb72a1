use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid {what}: {detail}")]
    InvalidParameter { what: &'static str, detail: String },

    #[error("frequency grid must hold at least two points with a positive step, got {0}")]
    EmptyGrid(String),

    #[error("spectra live on different frequency grids")]
    GridMismatch,

    #[error("gain spectrum has no positive bin; no usable channel")]
    NoUsableChannel,

    #[error("no feasible relay position for a {distance} m link with {min_separation} m minimum separation")]
    NoFeasibleRelayPosition { distance: f64, min_separation: f64 },

    #[error("{0}")]
    Config(String),

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn invalid(what: &'static str, detail: impl Into<String>) -> Self {
        Error::InvalidParameter {
            what,
            detail: detail.into(),
        }
    }

    pub(crate) fn io(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        Error::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
