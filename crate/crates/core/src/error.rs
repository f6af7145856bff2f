use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad error families, used by the command line tool to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Io,
    Kernel,
    Numerical,
}

impl ErrorCategory {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCategory::Config => 2,
            ErrorCategory::Io => 3,
            ErrorCategory::Kernel => 4,
            ErrorCategory::Numerical => 5,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("degenerate kernel: |theta(-1)| = {value:e} is below {tolerance:e}")]
    DegenerateKernel { value: f64, tolerance: f64 },

    #[error("root not bracketed on [{lo}, {hi}]: f(lo) = {f_lo:e}, f(hi) = {f_hi:e}")]
    NoBracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("bracketing failed at node {node} (x = {x}): {reason}")]
    NodeBracket { node: usize, x: f64, reason: String },

    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("extinction: r0^2 = {r0_sq} is not larger than 2t = {two_t}")]
    Extinct { r0_sq: f64, two_t: f64 },

    #[error("quadrature failure: {0}")]
    Quadrature(String),

    #[error("unstable finite-difference run: non-finite value at step {step}")]
    Unstable { step: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::InvalidKernel(_) | Error::DegenerateKernel { .. } => ErrorCategory::Kernel,
            Error::NoBracket { .. }
            | Error::NodeBracket { .. }
            | Error::Extinct { .. }
            | Error::Quadrature(_)
            | Error::Unstable { .. } => ErrorCategory::Numerical,
            Error::AtStep { source, .. } => source.category(),
            Error::InvalidArgument(_) | Error::Config(_) | Error::Parse { .. } => {
                ErrorCategory::Config
            }
            Error::Io { .. } | Error::Json(_) => ErrorCategory::Io,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn parse(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse { context: context.into(), message: message.into() }
    }

    pub(crate) fn at_step(step: usize, source: Error) -> Self {
        Error::AtStep { step, source: Box::new(source) }
    }
}
