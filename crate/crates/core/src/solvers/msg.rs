use ndarray::linalg::general_mat_mul;
use ndarray::{Array1, Array2, ArrayView1, Axis};

use super::MsgInit;
use crate::spectral::{
    check_dim, complete_basis, full_symmetric_eig, project_capped_fantope, project_fantope, rank_one_update,
    truncate_top_k, EigState, ProjectionResult, SubspaceState, RANK_TOL,
};
use crate::{Error, Result};

/// MSG iterate plus the running average of all post-step iterates.
#[derive(Debug, Clone, PartialEq)]
pub struct MsgState {
    pub iterate: EigState,
    /// Dense `d × d` mean of `M⁽¹⁾ … M⁽ᵗ⁾`; `None` when averaging is off.
    pub running_avg: Option<Array2<f64>>,
    pub steps: usize,
}

impl MsgState {
    pub fn new(dim: usize, k: usize, init: MsgInit, track_average: bool) -> Result<Self> {
        if k == 0 || k > dim {
            return Err(Error::invalid(format!("k = {k} must lie in 1..={dim}")));
        }
        let iterate = match init {
            MsgInit::ScaledIdentity => EigState::scaled_identity(dim, k as f64 / dim as f64),
            MsgInit::Zero => EigState::zero(dim),
        };
        Ok(MsgState {
            iterate,
            running_avg: track_average.then(|| Array2::zeros((dim, dim))),
            steps: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.iterate.dim()
    }

    /// Rank-`k` answer: [`msg_finalize`] once a step has been taken, the
    /// top-`k` eigenvectors of the current iterate before that.
    pub fn solution(&self, k: usize) -> Result<SubspaceState> {
        if self.steps == 0 {
            return Ok(truncate_top_k(&self.iterate, k)?.subspace);
        }
        msg_finalize(self, k)
    }
}

/// One MSG step: `M ← P(M + η·x·xᵀ)` with `P` the Fantope projection of the
/// spectrum. Eigenvectors are carried over unchanged by the projection.
pub fn msg_step(state: MsgState, x: ArrayView1<f64>, eta: f64, k: usize) -> Result<MsgState> {
    projected_step(state, x, eta, k, None)
}

/// MSG step whose projection keeps at most `cap` nonzero eigenvalues.
pub fn capped_msg_step(state: MsgState, x: ArrayView1<f64>, eta: f64, k: usize, cap: usize) -> Result<MsgState> {
    if state.iterate.rank() > cap {
        return Err(Error::invalid(format!(
            "iterate rank {} already exceeds the cap {cap}",
            state.iterate.rank()
        )));
    }
    projected_step(state, x, eta, k, Some(cap))
}

/// Top-`k` eigenvectors of the averaged iterate (of the current iterate when
/// averaging is off).
pub fn msg_finalize(state: &MsgState, k: usize) -> Result<SubspaceState> {
    if state.steps == 0 {
        return Err(Error::invalid("no MSG steps have been taken"));
    }
    match &state.running_avg {
        Some(avg) => Ok(truncate_top_k(&full_symmetric_eig(avg)?, k)?.subspace),
        None => Ok(truncate_top_k(&state.iterate, k)?.subspace),
    }
}

fn projected_step(mut state: MsgState, x: ArrayView1<f64>, eta: f64, k: usize, cap: Option<usize>) -> Result<MsgState> {
    let d = state.dim();
    check_dim(d, x.len())?;
    if !eta.is_finite() || eta < 0.0 {
        return Err(Error::invalid(format!(
            "step size must be finite and nonnegative, got {eta}"
        )));
    }
    // A zero step leaves the iterate alone even if it is infeasible.
    if eta > 0.0 && x.iter().any(|&v| v != 0.0) {
        let updated = rank_one_update(&state.iterate, x, eta)?;
        let projection = match cap {
            None => project_fantope(updated.eigvals.view(), k, d)?,
            Some(cap) => project_capped_fantope(updated.eigvals.view(), k, cap, d)?,
        };
        state.iterate = apply_projection(updated, &projection)?;
    }
    state.steps += 1;
    if let Some(avg) = state.running_avg.as_mut() {
        accumulate(avg, &state.iterate, state.steps);
    }
    Ok(state)
}

/// Replaces the spectrum by the projected one, activating basis completions
/// for implicit coordinates that received mass and dropping zeros.
fn apply_projection(updated: EigState, projection: &ProjectionResult) -> Result<EigState> {
    let r = updated.rank();
    let fill = if projection.fill_value > RANK_TOL {
        projection.fill_count
    } else {
        0
    };
    let basis = if fill > 0 {
        complete_basis(updated.basis.view(), fill)?
    } else {
        updated.basis
    };
    let values: Vec<f64> = projection
        .eigvals
        .iter()
        .copied()
        .chain(std::iter::repeat_n(projection.fill_value, fill))
        .collect();
    let mut order: Vec<usize> = (0..r + fill).filter(|&i| values[i] > RANK_TOL).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));

    let mut out_basis = Array2::zeros((basis.nrows(), order.len()));
    let mut out_vals = Array1::zeros(order.len());
    for (dst, &src) in order.iter().enumerate() {
        out_basis.column_mut(dst).assign(&basis.column(src));
        out_vals[dst] = values[src];
    }
    Ok(EigState {
        basis: out_basis,
        eigvals: out_vals,
    })
}

/// `avg ← ((t−1)/t)·avg + (1/t)·U·diag(σ)·Uᵀ`.
fn accumulate(avg: &mut Array2<f64>, iterate: &EigState, t: usize) {
    let t = t as f64;
    let scaled = &iterate.basis * &iterate.eigvals.view().insert_axis(Axis(0));
    general_mat_mul(1.0 / t, &scaled, &iterate.basis.t(), (t - 1.0) / t, avg);
}
