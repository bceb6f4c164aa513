use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("{what}: argument {value} outside the domain")]
    Domain { what: &'static str, value: f64 },

    /// The argument sits exactly on a singular point (e.g. the Popa boundary).
    #[error("{what}: singular at {value}")]
    Singular { what: &'static str, value: f64 },

    /// A function could not be evaluated (undefined or non-finite).
    #[error("evaluation of {what} failed at x = {x}")]
    Evaluation { what: String, x: f64 },

    /// A degenerate configuration, e.g. a non-invertible kernel.
    #[error("degenerate: {0}")]
    Degenerate(String),

    /// Malformed or inconsistent input parameters.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Too few samples to run the requested diagnostic.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// No bracketing interval exists for a root search.
    #[error("no bracket: target {target} below the minimal feasible value {min_feasible}")]
    NoBracket { target: f64, min_feasible: f64 },

    /// Sequential limits did not settle for any grid point.
    #[error("non-convergent: {0}")]
    NonConvergent(String),

    /// The limit function only takes the values 0 and 1.
    #[error("trivial kernel: {0}")]
    Trivial(String),

    /// A dilation parameter has no anchor inside the test set.
    #[error("no anchors for s = {s}; feasible window is {window:?}")]
    EmptyAnchors { s: f64, window: Option<(f64, f64)> },
}

pub type Result<T> = std::result::Result<T, Error>;
