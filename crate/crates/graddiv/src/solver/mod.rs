//! Dense and sparse symmetric linear algebra.
//!
//! The dense kernels ([`DMat`], [`Cholesky`], [`lu_solve`], [`sym_eigenvalues`])
//! serve the small per-element systems and stay self-contained. The global
//! normal equations go through [`SparseSymmetric`], whose direct path is a
//! sparse Cholesky with approximate-minimum-degree ordering and whose optional
//! iterative path is Jacobi-preconditioned conjugate gradients.

mod dense;
mod sparse;

pub use dense::{lu_solve, null_space_split, sym_eigenvalues, Cholesky, DMat};
pub use sparse::{sparse_spd_solve, SolveMethod, SparseSymmetric};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("matrix is not positive definite: pivot {pivot:.3e} at index {index}")]
    NotPositiveDefinite { index: usize, pivot: f64 },
    #[error("matrix is singular at column {0}")]
    Singular(usize),
    #[error("sparse factorization failed: {0}")]
    Factorization(String),
    #[error("conjugate gradients stalled after {iters} iterations, residual {residual:.3e}")]
    CgStalled { iters: usize, residual: f64 },
}
