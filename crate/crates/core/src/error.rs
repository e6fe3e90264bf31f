use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point {x} lies outside the mesh interval [{lo}, {hi}]")]
    OutOfRange { x: f64, lo: f64, hi: f64 },

    #[error("{what} is numerically singular (size {size}){hint}")]
    SingularMatrix {
        what: &'static str,
        size: usize,
        hint: &'static str,
    },

    #[error("numerical failure: {0}")]
    NoConvergence(String),

    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("invalid splitting: {0}")]
    InvalidSplitting(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("breakpoint mismatch: {0}")]
    BreakpointMismatch(String),

    #[error("config error in field `{field}`{}: {message}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Config {
        field: String,
        line: Option<usize>,
        message: String,
    },

    #[error("config file not found: {}", .0.display())]
    ConfigNotFound(PathBuf),

    #[error("malformed matrix file: {0}")]
    MatrixFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable error code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "INVALID_ARGUMENT",
            Error::OutOfRange { .. } => "OUT_OF_RANGE",
            Error::SingularMatrix { .. } => "SINGULAR_MATRIX",
            Error::NoConvergence(_) => "NO_CONVERGENCE",
            Error::Syntax { .. } => "EXPR_SYNTAX",
            Error::UnknownIdentifier { .. } => "EXPR_UNKNOWN_IDENT",
            Error::InvalidSplitting(_) => "INVALID_SPLITTING",
            Error::DimensionMismatch(_) => "DIMENSION_MISMATCH",
            Error::BreakpointMismatch(_) => "BREAKPOINT_MISMATCH",
            Error::Config { .. } => "CONFIG_INVALID",
            Error::ConfigNotFound(_) => "CONFIG_NOT_FOUND",
            Error::MatrixFormat(_) => "MATRIX_FORMAT",
            Error::Io(_) => "IO",
        }
    }

    /// Library module the error originates from.
    pub fn module(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) | Error::OutOfRange { .. } => "chebyshev",
            Error::SingularMatrix { .. } | Error::NoConvergence(_) => "spectral",
            Error::Syntax { .. } | Error::UnknownIdentifier { .. } => "expr",
            Error::InvalidSplitting(_) => "model",
            Error::DimensionMismatch(_) | Error::BreakpointMismatch(_) => "assembly",
            Error::Config { .. } | Error::ConfigNotFound(_) => "config",
            Error::MatrixFormat(_) | Error::Io(_) => "io",
        }
    }

    /// True for failures of the numerical pipeline (as opposed to bad input or I/O).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularMatrix { .. } | Error::NoConvergence(_)
        )
    }
}
