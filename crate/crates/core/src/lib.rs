//! Stochastic PCA over sample streams.
//!
//! Five solvers share a step/finalize interface so the benchmark harness can
//! drive them interchangeably:
//!
//! * batch second-moment eigendecomposition (the reference solution),
//! * incremental SVD with rank truncation,
//! * the stochastic power method (Oja-style, orthonormalized every step),
//! * Matrix Stochastic Gradient (MSG) over the Fantope
//!   `{M : 0 ⪯ M ⪯ I, trace(M) = k}`,
//! * capped MSG, which additionally bounds the rank of every iterate.
//!
//! MSG iterates are stored factored as `U·diag(σ)·Uᵀ`, so a step costs
//! `O(d·r²)` for an iterate of rank `r` and never forms a `d×d` matrix.

pub mod bench;
pub mod cli;
pub mod data;
mod error;
pub mod solvers;
pub mod spectral;

pub use error::{Error, Result};
