use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid calibration: {0}")]
    InvalidCalibration(String),
    #[error("no steady state: {0}")]
    NoSteadyState(String),
    #[error("non-finite input to {0}")]
    NonFinite(&'static str),
    #[error("static block of the model is singular")]
    SingularStaticBlock,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("eigenvalue iteration did not converge")]
    DecompositionFailure,
    #[error("system is not determinate ({unstable} unstable roots, {jumps} jump variables)")]
    NotDeterminate { unstable: usize, jumps: usize },
    #[error("jump variables cannot be pinned: unstable block does not load on them")]
    RankCondition,
    #[error("horizon too short: terminal deviation {deviation:.3e} exceeds {tolerance:.1e}")]
    HorizonTooShort { deviation: f64, tolerance: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("Riccati iteration did not converge after {iterations} iterations (last change {change:.3e})")]
    BestResponseNonConvergence { iterations: usize, change: f64 },
    #[error("closed loop is explosive (spectral radius {radius:.6})")]
    NotDeterminate { radius: f64 },
    #[error("strategy space of {nodes} nodes exceeds the 1e7 limit")]
    SpaceTooLarge { nodes: u128 },
    #[error("brute-force search supports models without jump variables only")]
    JumpVariablesUnsupported,
    #[error("invalid player set: {0}")]
    InvalidPlayers(String),
    #[error("invalid planner weights: {0}")]
    InvalidWeights(String),
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: parse error: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed output: {message}")]
    Malformed { path: PathBuf, message: String },
}
