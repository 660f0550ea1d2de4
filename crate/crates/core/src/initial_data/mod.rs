//! Initial data: the discrete mass distribution, the initial velocity
//! profile, and quantization of general measures into equal-mass atoms.

mod measure;
mod quantize;
mod velocity;

pub use measure::DiscreteMeasure;
pub use quantize::{quantize, MeasureSpec};
pub use velocity::InitialVelocity;
