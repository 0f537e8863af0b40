use thiserror::Error;

/// Failure modes of the series machinery.
///
/// Variants split into two families: input/validation problems (bad
/// frequency, bad window, malformed data) and numerical assertions (a
/// structural invariant such as defect order or a divisor bound did not
/// hold). [`Error::is_numerical`] tells them apart.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid frequency: {0}")]
    InvalidFrequency(String),

    #[error("exact resonance at wavenumber k = {k}")]
    Resonance { k: i64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("input has nonzero mean {mean:e} (scale {scale:e})")]
    NonZeroMean { mean: f64, scale: f64 },

    #[error("wavenumber {k} exceeds divisor cache size {k_max}")]
    ModeOutOfRange { k: i64, k_max: usize },

    #[error("|eps| = {eps:e} outside the admissible radius {gamma:e}")]
    EpsOutsideDomain { eps: f64, gamma: f64 },

    #[error("degree {degree} exceeds bound {bound}")]
    DegreeExceeded { degree: usize, bound: usize },

    #[error("window ({a}, {b}] invalid for a series of order {order}")]
    WindowRange { a: isize, b: usize, order: usize },

    #[error("composition requires u_0 = 0")]
    NonZeroBase,

    #[error("leading coefficient is not a constant")]
    NonConstantLeading,

    #[error("leading coefficient is singular (det = {det:e})")]
    SingularLeading { det: f64 },

    #[error("invariant `{name}` violated: {detail}")]
    Invariant { name: &'static str, detail: String },
}

impl Error {
    /// True for failed numerical assertions, false for validation errors.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Invariant { .. }
                | Error::SingularLeading { .. }
                | Error::NonConstantLeading
                | Error::DegreeExceeded { .. }
        )
    }

    pub(crate) fn invariant(name: &'static str, detail: impl Into<String>) -> Self {
        Error::Invariant {
            name,
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
