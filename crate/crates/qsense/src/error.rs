use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("evolution failed: {0}")]
    Evolution(String),

    #[error("invalid readout model: {0}")]
    Model(String),

    #[error("spectral density extends above the Nyquist frequency: {0}")]
    Aliasing(String),

    #[error("unsupported sequence: {0}")]
    Unsupported(String),

    #[error("integral did not converge: {0}")]
    Convergence(String),

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("undefined parameter: {0}")]
    Undefined(String),

    #[error("no interior optimum: {0}")]
    Boundary(String),

    #[error("invalid config:\n{}", .0.iter().map(|v| format!("  - {v}")).collect::<Vec<_>>().join("\n"))]
    Config(Vec<ConfigViolation>),

    #[error("config parse error: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// One problem found while validating an experiment config.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigViolation {
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for ConfigViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Argument(msg()))
    }
}
