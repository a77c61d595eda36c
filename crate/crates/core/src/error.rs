use thiserror::Error;

/// Errors produced by the simulation engine.
#[derive(Debug, Error)]
pub enum DickeError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("basis dimension {dimension} exceeds the cap of {cap}")]
    DimensionOverflow { dimension: usize, cap: usize },

    #[error("{solver} did not converge after {iterations} iterations (best estimates: {best:?})")]
    NotConverged {
        solver: &'static str,
        iterations: usize,
        best: Vec<f64>,
    },

    #[error("norm drift {drift:e} exceeds {limit:e} at t = {time} (spectral bounds may be too tight)")]
    NormDrift { drift: f64, limit: f64, time: f64 },

    #[error("coordinate singularity: Q^2 + P^2 = {radius2} at t = {time}")]
    Singularity { radius2: f64, time: f64 },

    #[error("request is only valid in the {expected} phase (lambda = {lambda}, lambda_c = {lambda_c})")]
    WrongPhase {
        expected: &'static str,
        lambda: f64,
        lambda_c: f64,
    },

    #[error("degenerate mode coefficients, the linearized solution is undefined")]
    DegenerateModes,

    #[error("ODE integration failed: {0}")]
    Integration(String),

    #[error("time series does not cover the requested window [0, {requested}] (last sample at {available})")]
    WindowNotCovered { requested: f64, available: f64 },

    #[error("unknown column `{0}`")]
    UnknownColumn(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = DickeError> = std::result::Result<T, E>;
