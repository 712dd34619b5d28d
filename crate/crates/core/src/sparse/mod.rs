//! Sparse storage and direct factorization of the velocity-pressure
//! saddle-point systems.

mod lu;
mod matrix;
mod saddle;

pub use lu::{LuPattern, SparseLu, RESIDUAL_HARD_LIMIT, RESIDUAL_TOL};
pub use matrix::SparseMatrix;
pub use saddle::{apply_dirichlet, SaddleFactorization, SaddleLayout};

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum SolveError {
    #[error("shape mismatch: expected length {expected}, found {found}")]
    Shape { expected: usize, found: usize },
    #[error("singular system: {0}")]
    Singular(String),
    #[error("factorization failed: {0}")]
    Factorization(String),
    #[error("solve residual {residual:e} exceeds {bound:e}")]
    Residual { residual: f64, bound: f64 },
}
