use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid grid parameters or mismatched grids between operands.
    #[error("grid: {0}")]
    Grid(String),

    /// Argument outside the domain an operation is defined on.
    #[error("domain: {0}")]
    Domain(String),

    /// Invalid run configuration (bad key, unparsable value, bad ordering).
    #[error("config: {0}")]
    Config(String),

    /// A computation produced a non-finite value or otherwise lost meaning.
    #[error("numerical: {0}")]
    Numerical(String),

    /// An iterative solve stopped without meeting its tolerance.
    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
