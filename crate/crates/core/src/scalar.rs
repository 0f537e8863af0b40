//! Working precision.
//!
//! Every numeric routine in the crate is written against [`Real`] and
//! [`Cplx`]. Swapping the alias for an extended-precision type is the
//! single point where precision is chosen; the tolerances used in tests
//! assume IEEE double.

use num_complex::Complex;

pub type Real = f64;
pub type Cplx = Complex<Real>;

/// Tag written into coefficient files.
pub const PRECISION_TAG: &str = "f64";

/// Unit roundoff of [`Real`].
pub const UNIT_ROUNDOFF: Real = Real::EPSILON / 2.0;
