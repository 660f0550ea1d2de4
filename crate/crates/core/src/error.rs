use alloc::boxed::Box;
use alloc::string::String;
use core::fmt;

use crate::dynamics::SimState;
use crate::trajectory::TrajectoryMap;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone)]
pub enum Error {
    /// A numeric input was NaN, infinite, or outside the function's domain.
    Domain { what: &'static str, value: f64 },
    /// Input data violates a structural requirement (masses, monotone CDF, ...).
    Validation(String),
    /// Arguments are inconsistent with each other (a > b, length mismatch, ...).
    Argument(String),
    /// A time query outside `[0, horizon]`.
    OutOfRange { time: f64, horizon: f64 },
    /// The integrator produced non-finite values.
    Integration { time: f64, state: Box<SimState> },
    /// `max_steps` was exceeded; carries everything simulated so far.
    Truncated { steps: usize, partial: Box<TrajectoryMap> },
    /// Adaptive quadrature did not reach its tolerance.
    Quadrature(String),
    /// An internal invariant was breached.
    Invariant(String),
    /// One run of a sweep failed.
    Member { index: usize, source: Box<Error> },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain { what, value } => write!(f, "{what} out of domain: {value}"),
            Error::Validation(msg) => write!(f, "validation failed: {msg}"),
            Error::Argument(msg) => write!(f, "invalid argument: {msg}"),
            Error::OutOfRange { time, horizon } => {
                write!(f, "time {time} outside simulated range [0, {horizon}]")
            }
            Error::Integration { time, state } => write!(
                f,
                "integration produced non-finite values at t = {time} ({} clusters)",
                state.clusters.len()
            ),
            Error::Truncated { steps, partial } => write!(
                f,
                "step limit {steps} exceeded at t = {}",
                partial.last_time()
            ),
            Error::Quadrature(msg) => write!(f, "quadrature failed: {msg}"),
            Error::Invariant(msg) => write!(f, "internal invariant breached: {msg}"),
            Error::Member { index, source } => write!(f, "sweep member {index} failed: {source}"),
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn finite(what: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Domain { what, value })
    }
}
