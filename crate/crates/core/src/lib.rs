//! Event-driven sticky-particle solver for one-dimensional pressureless Euler
//! and Euler-Poisson dynamics.
//!
//! Mass is carried by finitely many atoms. Between collisions the clusters
//! follow Newton's equations with a pairwise interaction `W`; colliding
//! clusters stick together and move on with their mass-averaged velocity.
//! The resulting [`TrajectoryMap`] answers Lagrangian queries (`X(y, t)`,
//! push-forwards, conditional expectations) and the [`diagnostics`] module
//! checks the inequalities these flows satisfy.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod euler_poisson;
pub mod initial_data;
pub mod math;
pub mod potential;
pub mod trajectory;

pub use diagnostics::{verify, CheckKind, CheckRecord, DiagnosticsReport, ToleranceBudget};
pub use dynamics::{simulate, Cluster, ClusterId, MergeEvent, SimState, SolverOptions};
pub use error::{Error, Result};
pub use euler_poisson::{simulate_ep, AbsPotential};
pub use initial_data::{quantize, DiscreteMeasure, InitialVelocity, MeasureSpec};
pub use potential::{Interaction, Potential, PotentialKind, TabulatedPotential};
pub use trajectory::{Frame, FrameKind, Model, MonotoneMap, Provenance, TrajectoryMap};
