//! Dense spectral primitives shared by the solvers.
//!
//! Everything here is a pure function of its inputs. The iterate of the
//! MSG-family solvers is an [`EigState`], a factored PSD matrix
//! `M = U·diag(σ)·Uᵀ` whose basis `U` has orthonormal columns.

mod eigh;
mod fantope;
mod ortho;
mod update;

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::{Error, Result};

pub use eigh::full_symmetric_eig;
pub use fantope::{project_capped_fantope, project_fantope, ProjectionResult};
pub use ortho::{complete_basis, max_principal_angle, orthonormalize};
pub(crate) use update::rank_one_update_unpruned;
pub use update::{rank_one_update, UpdateCore};

/// Eigenvalues at or below this are treated as zero and dropped from
/// factored states.
pub const RANK_TOL: f64 = 1e-12;

/// Relative residual norm below which a sample is considered to lie in the
/// span of the current basis.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Orthonormality tolerance checked by [`EigState::validate`].
pub const ORTHO_TOL: f64 = 1e-9;

/// Factored symmetric matrix `basis · diag(eigvals) · basisᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigState {
    /// `d × r`, orthonormal columns.
    pub basis: Array2<f64>,
    /// Length `r`, non-increasing.
    pub eigvals: Array1<f64>,
}

impl EigState {
    /// Builds a state and checks its invariants (orthonormal basis,
    /// non-increasing nonnegative spectrum, `r ≤ d`).
    pub fn new(basis: Array2<f64>, eigvals: Array1<f64>) -> Result<Self> {
        let state = EigState { basis, eigvals };
        state.validate()?;
        Ok(state)
    }

    /// The zero matrix in dimension `dim` (rank 0).
    pub fn zero(dim: usize) -> Self {
        EigState {
            basis: Array2::zeros((dim, 0)),
            eigvals: Array1::zeros(0),
        }
    }

    /// `value · I` represented at full rank.
    pub fn scaled_identity(dim: usize, value: f64) -> Self {
        EigState {
            basis: Array2::eye(dim),
            eigvals: Array1::from_elem(dim, value),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn rank(&self) -> usize {
        self.eigvals.len()
    }

    pub fn trace(&self) -> f64 {
        self.eigvals.sum()
    }

    /// Dense `d × d` reconstruction. Only for averaging and tests.
    pub fn reconstruct(&self) -> Array2<f64> {
        let scaled = &self.basis * &self.eigvals.view().insert_axis(Axis(0));
        scaled.dot(&self.basis.t())
    }

    /// Number of eigenvalues strictly above `tol`.
    pub fn effective_rank(&self, tol: f64) -> usize {
        self.eigvals.iter().filter(|&&v| v > tol).count()
    }

    /// Drops eigenpairs with eigenvalue `≤ tol`. Assumes sorted eigenvalues.
    pub fn prune(mut self, tol: f64) -> Self {
        let keep = self.eigvals.iter().take_while(|&&v| v > tol).count();
        if keep < self.rank() {
            self.basis = self.basis.slice(s![.., ..keep]).to_owned();
            self.eigvals = self.eigvals.slice(s![..keep]).to_owned();
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        let (d, r) = self.basis.dim();
        if r != self.eigvals.len() {
            return Err(Error::DimensionMismatch {
                expected: r,
                got: self.eigvals.len(),
            });
        }
        if r > d {
            return Err(Error::invalid(format!("rank {r} exceeds dimension {d}")));
        }
        if let Some(v) = self.eigvals.iter().find(|v| **v < -RANK_TOL || !v.is_finite()) {
            return Err(Error::invalid(format!("eigenvalue {v} is negative or non-finite")));
        }
        if self.eigvals.windows(2).into_iter().any(|w| w[0] < w[1]) {
            return Err(Error::invalid("eigenvalues are not non-increasing"));
        }
        let dev = orthonormality_error(self.basis.view());
        if dev > ORTHO_TOL {
            return Err(Error::invalid(format!("basis is not orthonormal (deviation {dev:e})")));
        }
        Ok(())
    }
}

/// Orthonormal `d × k` basis of a k-dimensional subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceState {
    pub basis: Array2<f64>,
}

impl SubspaceState {
    pub fn new(basis: Array2<f64>) -> Result<Self> {
        let dev = orthonormality_error(basis.view());
        if dev > ORTHO_TOL {
            return Err(Error::invalid(format!("basis is not orthonormal (deviation {dev:e})")));
        }
        Ok(SubspaceState { basis })
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn k(&self) -> usize {
        self.basis.ncols()
    }

    /// Dense projector `U·Uᵀ`.
    pub fn projector(&self) -> Array2<f64> {
        self.basis.dot(&self.basis.t())
    }
}

/// Result of [`truncate_top_k`].
#[derive(Debug, Clone)]
pub struct Truncation {
    pub subspace: SubspaceState,
    /// Columns appended as arbitrary orthonormal completions because the
    /// state had rank below `k`.
    pub padded: usize,
    /// The k-th and (k+1)-th eigenvalues coincide, so the top-k subspace is
    /// not unique.
    pub tied: bool,
}

/// Keeps the `k` eigenvectors of largest eigenvalue.
///
/// Ties keep the earlier-stored column. A state of rank below `k` is padded
/// with deterministic orthonormal completions and reported via
/// [`Truncation::padded`].
pub fn truncate_top_k(state: &EigState, k: usize) -> Result<Truncation> {
    let d = state.dim();
    if k == 0 || k > d {
        return Err(Error::invalid(format!("k = {k} must lie in 1..={d}")));
    }
    let r = state.rank();
    // Stable sort so equal eigenvalues keep storage order.
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| state.eigvals[b].total_cmp(&state.eigvals[a]));

    let take = k.min(r);
    let mut basis = Array2::zeros((d, take));
    for (dst, &src) in order.iter().take(take).enumerate() {
        basis.column_mut(dst).assign(&state.basis.column(src));
    }
    let tied = if r > k {
        let a = state.eigvals[order[k - 1]];
        let b = state.eigvals[order[k]];
        (a - b).abs() <= RANK_TOL * a.abs().max(1.0)
    } else {
        false
    };
    let padded = k - take;
    if padded > 0 {
        basis = complete_basis(basis.view(), padded)?;
    }
    Ok(Truncation {
        subspace: SubspaceState { basis },
        padded,
        tied,
    })
}

/// Largest absolute entry of `UᵀU − I`.
pub fn orthonormality_error(basis: ArrayView2<f64>) -> f64 {
    let gram = basis.t().dot(&basis);
    gram.indexed_iter()
        .map(|((i, j), &g)| (g - if i == j { 1.0 } else { 0.0 }).abs())
        .fold(0.0, f64::max)
}

pub(crate) fn norm(v: ArrayView1<f64>) -> f64 {
    v.dot(&v).sqrt()
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}
