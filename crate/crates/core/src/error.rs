use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside its valid range.
    #[error("domain error: {0}")]
    Domain(String),

    /// A series, quadrature or optimizer could not reach the requested accuracy.
    #[error("accuracy error: {0}")]
    Accuracy(String),

    /// A path was queried beyond the time it was simulated to.
    #[error("horizon error: requested t = {requested}, path covers up to {available}")]
    Horizon { requested: f64, available: f64 },

    /// A conditional estimate had no observations to condition on.
    #[error("conditioning error: {0}")]
    Conditioning(String),

    /// A statistical estimate is degenerate (zero variance, too few points).
    #[error("estimation error: {0}")]
    Estimation(String),

    /// A hypothesis required by the operation is violated.
    #[error("precondition error: {0}")]
    Precondition(String),

    #[error("input error: {0}")]
    Input(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors that signal loss of numerical accuracy rather than bad input.
    pub fn is_accuracy(&self) -> bool {
        matches!(
            self,
            Error::Accuracy(_) | Error::Estimation(_) | Error::Conditioning(_)
        )
    }
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn accuracy<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Accuracy(msg.into()))
}
