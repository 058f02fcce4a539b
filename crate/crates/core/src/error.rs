//! Error type shared by the numerical modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("Fock level {level} exceeds cutoff n_max = {n_max}")]
    CutoffViolation { level: usize, n_max: usize },

    #[error(
        "truncation inadequate: probability mass {tail:.3e} in the top levels exceeds \
         tail budget {budget:.3e}; n_max >= {required} is needed"
    )]
    TruncationInadequate {
        tail: f64,
        budget: f64,
        required: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("ordering parameter s = {0} is singular, s < 1 is required")]
    SingularParameter(f64),

    #[error("integration step too large: gamma*t/steps = {ratio:.3e} exceeds {limit:.0e}")]
    StepSize { ratio: f64, limit: f64 },

    #[error("interaction time {tau} outside [0, {tau_max}]")]
    TauOutOfRange { tau: f64, tau_max: f64 },

    #[error("interaction-time grid too coarse: {points} points, at least {required} needed")]
    GridTooCoarse { points: usize, required: usize },

    #[error("interaction-time grid invalid: {0}")]
    InvalidGrid(String),

    #[error("inversion value {value} at index {index} lies outside [-1, 1]")]
    InvalidSignal { index: usize, value: f64 },
}
