//! Computation, parameterization and verification of (D,E)-inverses of
//! complex matrices, together with the classical generalized inverses
//! they specialize to.

pub mod analysis;
pub mod error;
pub mod existence;
pub mod inverse;
pub mod linalg;
pub mod matrix;
pub mod random;
pub mod reference;
pub mod special;

pub use error::{Error, Result};
pub use existence::{existence_report, ExistenceReport};
pub use inverse::{
    bc_inverse, inverse_along, onesided_family, ComputeOptions, InverseResult, Method,
    OneSidedFamily, PQDecomposition, Residuals, Side,
};
pub use linalg::Tolerance;
pub use matrix::{c64, CMatrix, C64};
