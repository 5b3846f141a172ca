use thiserror::Error;

use crate::model::SymmetryClass;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The deformation must satisfy xi > -1; at xi = -1 the ellipse degenerates.
    #[error("deformation xi = {xi} is outside the domain xi > -1")]
    Domain { xi: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("Cholesky factorization of the overlap matrix failed at size N = {size}")]
    CholeskyFailure { size: usize },

    #[error(
        "eigenvalue {real} + {imag}i at N = {size} exceeds the imaginary tolerance {tolerance}"
    )]
    RealityViolation {
        size: usize,
        real: f64,
        imag: f64,
        tolerance: f64,
    },

    #[error("periodic quadrature did not converge by {max_nodes} nodes")]
    NonConvergence { max_nodes: usize },

    #[error("level n = {level} does not belong to symmetry class {class}")]
    LevelNotInClass { level: u32, class: SymmetryClass },

    #[error("left/right eigenvector overlap {overlap:e} is below {threshold:e}")]
    BiorthogonalityFailure { overlap: f64, threshold: f64 },

    #[error("high-precision refinement did not settle within {steps} steps")]
    RefinementStalled { steps: usize },

    #[error("basis size N = {size} exceeds the limit {limit} for this basis")]
    SizeTooLarge { size: usize, limit: usize },
}
