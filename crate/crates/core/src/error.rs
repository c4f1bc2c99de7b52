use thiserror::Error;

/// Errors raised by the model, the solvers and the configuration layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of a constitutive law.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// A local or banded solve failed.
    #[error("solver error{}: {msg}", cell.map(|c| format!(" in cell {c}")).unwrap_or_default())]
    Solver { cell: Option<usize>, msg: String },

    /// The alternating iteration did not reach the stopping threshold.
    #[error("{stage} iteration did not converge after {iters} iterations (last error {last_error:e})")]
    NotConverged {
        stage: &'static str,
        iters: usize,
        last_error: f64,
    },

    /// A time step failed; wraps the underlying error with the step's start time.
    #[error("step starting at t = {t} failed: {source}")]
    Step { t: f64, source: Box<Error> },

    #[error("internal error: {0}")]
    Internal(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn solver(cell: usize, msg: impl Into<String>) -> Self {
        Error::Solver {
            cell: Some(cell),
            msg: msg.into(),
        }
    }

    /// Cell index carried by the error (looking through step wrappers).
    pub fn cell(&self) -> Option<usize> {
        match self {
            Error::Solver { cell, .. } => *cell,
            Error::Step { source, .. } => source.cell(),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
