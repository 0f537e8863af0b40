//! Fixtures shared by the benchmarks.

use lindstedt_core::{Frequency, MapSpec, Result};

/// Golden-mean rotation, `τ = 1`, `α = 3`, `g = sin(2πθ)`.
pub fn reference_map(k_max: usize) -> Result<MapSpec> {
    MapSpec::sine(3, Frequency::golden(1.0, k_max)?)
}
