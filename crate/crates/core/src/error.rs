use thiserror::Error;

/// Failures raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("potential is not convex: min V'' = {min_second_derivative} at x = {at}")]
    NotConvex { min_second_derivative: f64, at: f64 },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("equilibrium factor r changes sign on the support (min r = {min_r})")]
    NotOneCut { min_r: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("two particles are closer than {threshold:e} (indices {index} and {next})")]
    DegenerateGap {
        index: usize,
        next: usize,
        threshold: f64,
    },

    #[error("initial configuration has zero density under the target")]
    InfeasibleInit,

    #[error("sample set is empty")]
    EmptySampleSet,

    #[error("window [{first}, {last}] is out of range for N = {n}")]
    WindowOutOfRange { first: usize, last: usize, n: usize },

    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("degenerate window: {0}")]
    DegenerateWindow(String),
}

pub type Result<T> = std::result::Result<T, Error>;
