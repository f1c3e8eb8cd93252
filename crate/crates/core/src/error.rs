//! Error type shared by all core modules.

use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Mixture has no usable mass (total weight <= 0 or no components).
    DegenerateMixture,
    /// A scalar parameter is outside its admissible range.
    InvalidParameter(&'static str),
    /// Vector/matrix dimensions do not line up.
    DimensionMismatch { expected: usize, got: usize },
    /// A matrix that must be positive definite is not.
    NotPositiveDefinite,
    /// Innovation covariance (or another system matrix) is singular.
    SingularMatrix,
    /// GCI normalizer fell below the numerical floor: the densities do
    /// not overlap enough to be fused. Carries the log of the
    /// normalizer and the best pairwise log-eta seen, for diagnosis.
    IncompatibleDensities { log_normalizer: f64, best_log_eta: f64 },
    /// Two components carry the same label where labels must be unique.
    LabelCollision { time: u32, index: u32 },
    /// Fusion-map orientation violated (|I1| > |I2|).
    OrientationError { left: usize, right: usize },
    /// Discretization grid misses too much probability mass.
    CoverageError { mass: f64 },
    /// Conditional label distribution queried where the state marginal
    /// vanishes.
    UndefinedConditional,
    /// The exact decomposition check between the two divergence routes
    /// failed beyond numerical tolerance.
    DecompositionMismatch { direct: f64, via_mu: f64 },
    /// Every association option of some track has zero likelihood.
    DegenerateUpdate,
    /// A discrete enumeration would exceed the documented size limit.
    ProblemTooLarge(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DegenerateMixture => write!(f, "mixture has no usable probability mass"),
            Error::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::NotPositiveDefinite => write!(f, "matrix is not positive definite"),
            Error::SingularMatrix => write!(f, "matrix is singular"),
            Error::IncompatibleDensities {
                log_normalizer,
                best_log_eta,
            } => write!(
                f,
                "densities are numerically incompatible (log normalizer {log_normalizer}, best log eta {best_log_eta})"
            ),
            Error::LabelCollision { time, index } => {
                write!(f, "duplicate label ({time},{index})")
            }
            Error::OrientationError { left, right } => {
                write!(f, "fusion maps need |I1| <= |I2|, got {left} > {right}")
            }
            Error::CoverageError { mass } => {
                write!(f, "grid covers only {mass} of the probability mass")
            }
            Error::UndefinedConditional => {
                write!(f, "conditional label distribution undefined: zero state marginal")
            }
            Error::DecompositionMismatch { direct, via_mu } => write!(
                f,
                "divergence decomposition mismatch: direct {direct} vs mu-route {via_mu}"
            ),
            Error::DegenerateUpdate => {
                write!(f, "update has zero total likelihood for some track")
            }
            Error::ProblemTooLarge(what) => write!(f, "problem too large: {what}"),
        }
    }
}
