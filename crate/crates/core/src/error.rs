use thiserror::Error;

/// Errors raised across the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("degenerate channel for user {user}")]
    DegenerateChannel { user: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invalid saturation band: gamma_lb = {gamma_lb:e}, gamma_ub = {gamma_ub:e}")]
    InvalidBand { gamma_lb: f64, gamma_ub: f64 },

    #[error("{context}: {message}")]
    Io { context: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
