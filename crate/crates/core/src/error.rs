use thiserror::Error;

/// Errors raised by the geometric and dynamical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum BicycleError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("degenerate line: the two defining points coincide")]
    DegenerateLine,

    #[error("expected {expected} vertices, found {found}")]
    WrongArity { expected: usize, found: usize },

    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate monodromy (determinant vanishes, the length parameter hits a side length)")]
    DegenerateMonodromy,

    #[error("elliptic monodromy has no real fixed point")]
    NoRealFixedPoint,

    #[error("pole at ell = a: the edge matrix is undefined")]
    PoleAtEllEqualsA,

    #[error("projective denominator vanishes")]
    ProjectiveDenominatorZero,

    #[error("monodromy is elliptic; no closed companion polygon exists")]
    EllipticMonodromy,

    #[error("monodromy is the identity; every seed closes, an explicit seed direction is required")]
    IdentityMonodromy,

    #[error("propagated polygon does not close (defect {defect:e})")]
    ClosureFailure { defect: f64 },

    #[error("polygon has zero signed area")]
    ZeroArea,

    #[error("rear-track radii admit no consistent orientation")]
    SignAssignmentFailure,

    #[error("the length parameter coincides with a chain radius")]
    PoleOnChain,

    #[error("chord {chord} exceeds the circumdiameter {diameter}")]
    ChordTooLong { chord: f64, diameter: f64 },

    #[error("polygon does not alternate between two concentric circles")]
    NotConcentricAlternating,
}

pub type Result<T> = std::result::Result<T, BicycleError>;
