//! Euler-Poisson dynamics: the attractive interaction `W(x) = |x|`.
//!
//! The force on a cluster is the mass to its right minus the mass to its
//! left, constant between collisions, so trajectories are exact parabolas
//! and collision times are roots of quadratic gap polynomials. This module
//! also provides the `W_ε → |x|` continuation study and the subdifferential
//! inequality for `sgn * μ`.

mod continuation;
mod exact;
mod subdiff;

pub use continuation::{
    default_epsilons, epsilon_continuation, epsilon_report, lagrangian_distance, ContinuationTolerances,
    EpsilonReport,
};
pub use exact::{ep_accelerations, simulate_ep};
pub use subdiff::{check_subdiff, sgn, sgn_convolve};

use alloc::string::String;

use crate::potential::Interaction;

/// `W(x) = |x|` with `W'(x) = sgn(x)`, `sgn(0) = 0`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AbsPotential;

impl Interaction for AbsPotential {
    fn w(&self, x: f64) -> f64 {
        x.abs()
    }

    fn w_prime(&self, x: f64) -> f64 {
        sgn(x)
    }

    fn semiconvexity(&self) -> f64 {
        0.0
    }

    fn label(&self) -> String {
        String::from("abs")
    }
}
