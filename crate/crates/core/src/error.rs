use thiserror::Error;

/// Errors raised by mesh construction, assembly and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("unsupported domain: {0}")]
    UnsupportedDomain(String),

    #[error("degenerate element {element}: signed measure {measure:e}")]
    DegenerateElement { element: usize, measure: f64 },

    #[error("matrix error: {0}")]
    Matrix(String),

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    Convergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("shift {xi} outside (0, E1) with E1 = {e1}")]
    Range { xi: f64, e1: f64 },

    #[error("mesh too coarse: {0}")]
    Resolution(String),

    #[error("mesh format: line {line}: {msg}")]
    Format { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
