use std::path::PathBuf;

/// Errors produced by geometry construction, configuration and the solvers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("unit cell has no pore space")]
    EmptyPore,

    #[error("tiling error: {0}")]
    Tiling(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("solver error in {context}: no convergence after {iterations} iterations (relative residual {residual:e})")]
    NoConvergence {
        context: String,
        iterations: usize,
        residual: f64,
    },

    #[error("solver error: {0}")]
    Solver(String),

    #[error("alignment error: {0}")]
    Alignment(String),

    #[error("at time level {level}: {source}")]
    AtLevel {
        level: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    /// True for configuration problems (as opposed to solver failures).
    pub fn is_config(&self) -> bool {
        match self {
            Error::Config { .. }
            | Error::Geometry(_)
            | Error::EmptyPore
            | Error::Tiling(_)
            | Error::Argument(_) => true,
            Error::AtLevel { source, .. } => source.is_config(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
