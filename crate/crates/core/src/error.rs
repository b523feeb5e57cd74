use thiserror::Error;

/// Errors raised by the numerical layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("signals live on different grids")]
    GridMismatch,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("aliasing: spill fraction {spill:.3e} exceeds tolerance")]
    Aliasing { spill: f64 },
    #[error("covering leaves a gap near frequency {at}")]
    CoveringGap { at: f64 },
    #[error("covering overlap {count} exceeds 2 at frequency {at}")]
    CoveringOverlap { count: usize, at: f64 },
    #[error("atom index (j={j}, k={k}) out of range")]
    IndexOutOfRange { j: i64, k: i64 },
    #[error("coefficient layout does not match the atom system")]
    LayoutMismatch,
    #[error("window spectrum vanishes near frequency {at}")]
    VanishingSpectrum { at: f64 },
    #[error("no convergence after {iterations} iterations (relative residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("malformed signal file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
