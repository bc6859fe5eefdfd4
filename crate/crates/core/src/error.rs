use thiserror::Error;

use crate::lattice::LatticePoint;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension must be at least 2, got {0}")]
    InvalidDimension(usize),

    #[error("zero vector has no direction")]
    ZeroVector,

    #[error("plane vectors are linearly dependent")]
    DependentPlane,

    #[error("invalid radius: {0}")]
    InvalidRadius(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point {0} lies outside the support ball")]
    OutsideSupport(LatticePoint),

    #[error("weight vanishes at {0}")]
    ZeroWeight(LatticePoint),

    #[error("no weight value for point {0}")]
    MissingWeight(LatticePoint),

    #[error("sinogram has no entry for the ray assigned to {0}")]
    MissingEntry(LatticePoint),

    #[error("direction {dir:?} is not effectively irrational for radius {radius}")]
    NotEffectivelyIrrational { dir: Vec<i64>, radius: String },

    #[error("inconsistent reconstruction plan: {0}")]
    PlanInconsistent(String),

    #[error("annulus outer radius {beta} is below the support radius {r}")]
    AnnulusTooSmall { beta: String, r: String },

    #[error("ray grazes the ball centred at {0} off-centre")]
    GrazingBall(LatticePoint),

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
