use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid chain parameters: {0}")]
    InvalidSpec(String),
    #[error("resource limit: {0}")]
    ResourceLimit(String),
    #[error("invalid basis: {0}")]
    InvalidBasis(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("state is not normalized (norm^2 = {0})")]
    Normalization(f64),
    #[error("truncation error: tail mass {tail:e} exceeds {limit:e}")]
    Truncation { tail: f64, limit: f64 },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("empty window [{0}, {1}]")]
    EmptyWindow(f64, f64),
    #[error("invalid time grid: {0}")]
    Grid(String),
    #[error("no front above threshold {threshold} at t = {time}")]
    NoFront { time: f64, threshold: f64 },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
