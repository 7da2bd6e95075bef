use thiserror::Error;

/// Errors raised by mesh construction, discretization and solves.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid mesh structure: {0}")]
    Structure(String),

    #[error("unsupported: {0}")]
    Capability(String),

    #[error("ill-conditioned local problem: {0}")]
    Conditioning(String),

    #[error("matrix is not symmetric positive definite: {0}")]
    NotSpd(String),

    #[error("iterative solver did not converge: {0}")]
    Convergence(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("level {level}: {source}")]
    AtLevel {
        level: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short category name, used for CLI exit reporting.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::Structure(_) => "structure",
            Error::Capability(_) => "capability",
            Error::Conditioning(_) => "conditioning",
            Error::NotSpd(_) => "not-spd",
            Error::Convergence(_) => "convergence",
            Error::Dimension(_) => "dimension",
            Error::Invariant(_) => "invariant",
            Error::Config(_) => "config",
            Error::AtLevel { source, .. } => source.category(),
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
