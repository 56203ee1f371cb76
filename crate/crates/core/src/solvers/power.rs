use ndarray::{Array2, ArrayView1, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::spectral::{check_dim, orthonormalize, SubspaceState};
use crate::{Error, Result};

/// Orthonormalized `d × k` Gaussian matrix from a seeded generator.
pub fn random_subspace(dim: usize, k: usize, seed: u64) -> Result<SubspaceState> {
    if k == 0 || k > dim {
        return Err(Error::invalid(format!("k = {k} must lie in 1..={dim}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = Array2::from_shape_simple_fn((dim, k), || StandardNormal.sample(&mut rng));
    Ok(SubspaceState {
        basis: orthonormalize(g.view())?,
    })
}

/// `U ← orth(U + η·x·(xᵀU))`.
pub fn power_method_step(state: SubspaceState, x: ArrayView1<f64>, eta: f64) -> Result<SubspaceState> {
    check_dim(state.dim(), x.len())?;
    if !eta.is_finite() || eta < 0.0 {
        return Err(Error::invalid(format!(
            "step size must be finite and nonnegative, got {eta}"
        )));
    }
    if eta == 0.0 {
        return Ok(state);
    }
    let coeffs = state.basis.t().dot(&x) * eta;
    let mut basis = state.basis;
    let xc = x.insert_axis(Axis(1));
    // Rank-one correction, O(d·k).
    for (mut col, &c) in basis.columns_mut().into_iter().zip(coeffs.iter()) {
        col.scaled_add(c, &xc.column(0));
    }
    Ok(SubspaceState {
        basis: orthonormalize(basis.view())?,
    })
}
