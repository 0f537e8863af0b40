//! Trigonometric polynomials in one angle and the rotation number they are
//! shifted by.
//!
//! Angles are measured in turns: `θ ∈ T = R/Z`, and the mode `k` is
//! `e^{2πikθ}`.

mod frequency;
mod trig;

pub use frequency::{estimate_diophantine, fractional_part_mul, Frequency, GOLDEN_MEAN};
pub use trig::{TrigPoly, DEFAULT_DROP_TOL};
