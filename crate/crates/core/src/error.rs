use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

/// State of a run at the moment non-finite values were detected.
#[derive(Debug, Clone, PartialEq)]
pub struct BlowUpReport {
    pub time: f64,
    pub step: usize,
    pub pi_linf: f64,
    pub omega_linf: f64,
    pub velocity_linf: f64,
}

impl fmt::Display for BlowUpReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "non-finite state at t = {:.6e} (step {}): |Pi|_inf = {:.3e}, |Omega|_inf = {:.3e}, |u|_inf = {:.3e}",
            self.time, self.step, self.pi_linf, self.omega_linf, self.velocity_linf
        )
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("blow-up: {0}")]
    BlowUp(BlowUpReport),

    #[error("malformed field snapshot: {0}")]
    Snapshot(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
