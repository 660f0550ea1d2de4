//! Sticky-particle dynamics for a smooth interaction potential.
//!
//! Clusters follow `γ̈_k = -Σ_j M_j W'(γ_k - γ_j)` between collisions
//! (classical RK4 with gap-driven step control). A collision is located by
//! bisection on re-integrated substeps and resolved by a perfectly inelastic
//! merge: summed mass, mass-weighted mean velocity.

mod events;
mod integrator;
mod simulate;
mod state;

pub use events::{locate_collision, Collision, EventTolerances};
pub use integrator::{accelerations, advance_segment};
pub use simulate::{simulate, SolverOptions};
pub use state::{cascade_merges, merge, Cluster, ClusterId, MergeEvent, SimState};

pub(crate) use integrator::rk4_step;
