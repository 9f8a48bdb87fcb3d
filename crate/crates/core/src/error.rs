use thiserror::Error;

use crate::existence::ExistenceReport;
use crate::inverse::Residuals;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("matrix has numerical rank zero")]
    RankZero,

    #[error("matrix is singular at the working tolerance")]
    Singular,

    #[error("subspaces are not complementary")]
    NotComplementary,

    #[error(
        "(D,E)-inverse does not exist: rk(D)={}, rk(E)={}, rk(EAD)={}",
        .0.rk_d, .0.rk_e, .0.rk_ead
    )]
    NotInvertible(Box<ExistenceReport>),

    #[error(
        "one-sided (D,E)-inverse does not exist: rk(D)={}, rk(E)={}, rk(EAD)={}",
        .0.rk_d, .0.rk_e, .0.rk_ead
    )]
    NotOneSidedInvertible(Box<ExistenceReport>),

    #[error("methods disagree by {disagreement:.3e} (bound {bound:.3e})")]
    CrossCheckFailed { disagreement: f64, bound: f64 },

    #[error("defining-equation residuals {residuals:?} exceed {bound:.3e}")]
    ResidualCheckFailed { residuals: Residuals, bound: f64 },

    #[error("matrix has no group inverse (index greater than one)")]
    NoGroupInverse,

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("subspace mismatch: {0}")]
    SubspaceMismatch(String),

    #[error("shift {0:e} makes the resolvent singular")]
    SingularShift(f64),

    #[error("rank drifts inside the sampling window: {0}")]
    RankDrift(String),
}
