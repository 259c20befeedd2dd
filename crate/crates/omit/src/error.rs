//! Error taxonomy shared by the library and the CLI.

use thiserror::Error;

/// Unified error type. Each variant maps to a stable CLI exit code and a
/// machine-readable kind string so callers can branch without parsing
/// human-oriented messages.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or argument is outside its physical or structural domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Configuration file problems: missing keys, unknown keys, bad values.
    #[error("config error: {0}")]
    Config(String),

    /// A numerical procedure failed: non-convergence, step underflow,
    /// non-finite state, insufficient data windows.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The steady-state cubic has three real photon-number roots. The caller
    /// must pick a branch explicitly; silent selection would hide physics.
    #[error("bistable steady state: photon-number roots {roots:?}; select a branch explicitly")]
    Bistable { roots: Vec<f64> },

    /// The two response poles coincide (critical drive); per-pole residues
    /// are undefined there. The total response remains available.
    #[error("degenerate response poles: {0}")]
    DegeneratePoles(String),

    /// The requested measurement needs a finer frequency grid.
    #[error("grid too coarse: {0}")]
    Resolution(String),

    /// A comparison exceeded its acceptance threshold.
    #[error("threshold breached: {0}")]
    Threshold(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// CLI exit code: 2 validation, 3 numerical failure, 4 threshold breach.
    /// Input I/O problems count as validation.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_) | Error::Config(_) | Error::Io(_) => 2,
            Error::Numerical(_)
            | Error::Bistable { .. }
            | Error::DegeneratePoles(_)
            | Error::Resolution(_) => 3,
            Error::Threshold(_) => 4,
        }
    }

    /// Stable kind word for machine-readable stderr output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::Config(_) => "config",
            Error::Numerical(_) => "numerical",
            Error::Bistable { .. } => "bistable",
            Error::DegeneratePoles(_) => "degenerate_poles",
            Error::Resolution(_) => "resolution",
            Error::Threshold(_) => "threshold",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
