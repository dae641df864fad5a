use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Rejected Hilbert-space or run configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// A physical parameter outside its allowed range.
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("shape mismatch: expected {expected}x{expected}, got {rows}x{cols}")]
    ShapeMismatch { expected: usize, rows: usize, cols: usize },

    #[error("integrator step size underflow at t = {t} ns (step {step:e} ns)")]
    Stiff { t: f64, step: f64 },

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("degenerate Liouvillian: {0}")]
    Degenerate(String),

    #[error("correlation undefined: steady-state photon number {photons:e} is below 1e-12")]
    UndefinedCorrelation { photons: f64 },

    #[error("no enhancement: lifetime ratio {ratio} < 1")]
    NoEnhancement { ratio: f64 },

    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    #[error("degenerate fit: normal equations singular along {direction}")]
    DegenerateFit { direction: String },

    #[error("{}:{line}:{column}: {message}", file.display())]
    Parse { file: PathBuf, line: usize, column: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(
        file: impl Into<PathBuf>,
        line: usize,
        column: usize,
        message: impl Into<String>,
    ) -> Self {
        Error::Parse { file: file.into(), line, column, message: message.into() }
    }
}
