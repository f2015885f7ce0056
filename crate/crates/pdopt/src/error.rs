//! Error type shared across the crate.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Grid construction rejected (dimension, cell count, time steps).
    InvalidGrid(String),
    /// A scalar parameter is outside its admissible range.
    InvalidParameter(String),
    /// Two objects that must live on the same grid do not.
    GridMismatch { expected: String, got: String },
    /// Vector/matrix sizes disagree.
    ShapeMismatch { expected: usize, got: usize },
    /// An iterative linear solver hit its cap before reaching tolerance.
    SolverFailure { iterations: usize, residual: f64 },
    /// Training produced a non-finite loss or gradient.
    TrainingFailure(String),
    /// A diagnostic was requested that needs data the instance does not carry.
    MissingExact(&'static str),
    /// Model file malformed or written by an unknown schema version.
    ModelFormat(String),
    /// Filesystem problem while reading or writing a model file.
    Io(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidGrid(msg) => write!(f, "invalid grid: {msg}"),
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::GridMismatch { expected, got } => {
                write!(f, "grid mismatch: expected {expected}, got {got}")
            }
            Error::ShapeMismatch { expected, got } => {
                write!(f, "shape mismatch: expected length {expected}, got {got}")
            }
            Error::SolverFailure { iterations, residual } => write!(
                f,
                "linear solver failed to converge within {iterations} iterations \
                 (relative residual {residual:.3e})"
            ),
            Error::TrainingFailure(msg) => write!(f, "training failure: {msg}"),
            Error::MissingExact(what) => {
                write!(f, "diagnostic needs {what}, which this instance does not carry")
            }
            Error::ModelFormat(msg) => write!(f, "model format: {msg}"),
            Error::Io(msg) => write!(f, "io: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
