//! Lindstedt series for quasi-periodic invariant circles of the dissipative
//! standard map
//!
//! ```text
//! f(x, y) = (x + λ(ε) y + μ − ε g(x),  λ(ε) y + μ − ε g(x)),   λ(ε) = 1 − ε^α,
//! ```
//!
//! computed two independent ways: order by order from the scalar hull
//! equation ([`lindstedt`]) and by a coefficient-doubling quasi-Newton step
//! built on automatic reducibility ([`newton`]). [`diagnostics`] measures
//! what the coefficients do: analytic norms, Gevrey growth fits, domain
//! radii, and invariance residuals evaluated through the actual map.

pub mod cohomology;
pub mod diagnostics;
pub mod epsseries;
pub mod error;
pub mod fourier;
pub mod lindstedt;
pub mod newton;
pub mod scalar;

pub use epsseries::{EpsSeries, ScalarSeries, Series};
pub use error::{Error, Result};
pub use fourier::{Frequency, TrigPoly, GOLDEN_MEAN};
pub use lindstedt::{direct_expansion, hull_to_embedding, Embedding, HullExpansion, MapSpec};
pub use newton::{newton_step, run_doubling, NewtonState, StepReport};
pub use scalar::{Cplx, Real};
