use ndarray::{s, Array1, Array2, ArrayView1};

use crate::spectral::{rank_one_update_unpruned, EigState, RANK_TOL};
use crate::{Error, Result};

/// Running truncated factorization `U·diag(S)` of the absorbed samples
/// (left singular vectors and singular values of the `d × t` sample matrix).
#[derive(Debug, Clone, PartialEq)]
pub struct SvdState {
    /// `d × l`, orthonormal columns.
    pub basis: Array2<f64>,
    /// Length `l`, non-increasing, all above [`RANK_TOL`].
    pub singvals: Array1<f64>,
    /// Samples absorbed so far.
    pub count: usize,
}

impl SvdState {
    pub fn empty(dim: usize) -> Self {
        SvdState {
            basis: Array2::zeros((dim, 0)),
            singvals: Array1::zeros(0),
            count: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn rank(&self) -> usize {
        self.singvals.len()
    }
}

/// Absorbs one sample and truncates back to rank `≤ k`.
///
/// The sample is split into its projection on `U` and a normalized
/// orthogonal residual; the `(l+1)×(l+1)` core built from `S`, the
/// projection coefficients and the residual norm is eigendecomposed, `U` is
/// rotated by the core's eigenvectors, and the trailing singular triplets
/// beyond `k` are dropped. Costs `O(d·k²)`.
pub fn incremental_svd_step(state: SvdState, x: ArrayView1<f64>, k: usize) -> Result<SvdState> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    let count = state.count + 1;
    let gram = EigState {
        basis: state.basis,
        eigvals: state.singvals.mapv(|s| s * s),
    };
    let updated = rank_one_update_unpruned(&gram, x, 1.0)?;
    let keep = updated
        .eigvals
        .iter()
        .take(k)
        .take_while(|&&v| v.max(0.0).sqrt() > RANK_TOL)
        .count();
    Ok(SvdState {
        basis: updated.basis.slice(s![.., ..keep]).to_owned(),
        singvals: updated.eigvals.slice(s![..keep]).mapv(|v| v.max(0.0).sqrt()),
        count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::max_principal_angle;
    use ndarray::array;

    fn two_dim_state() -> SvdState {
        let s = SvdState::empty(3);
        let s = incremental_svd_step(s, array![2.0, 0.0, 0.0].view(), 2).unwrap();
        incremental_svd_step(s, array![0.0, 1.0, 0.0].view(), 2).unwrap()
    }

    #[test]
    fn in_span_sample_keeps_span() {
        let state = two_dim_state();
        let before = state.basis.clone();
        let x = state.basis.column(0).to_owned() * 3.0;
        let after = incremental_svd_step(state.clone(), x.view(), 2).unwrap();
        assert_eq!(after.rank(), 2);
        assert_ne!(after.singvals, state.singvals);
        assert!(max_principal_angle(before.view(), after.basis.view()).unwrap() < 1e-12);
    }

    #[test]
    fn orthogonal_sample_grows_rank() {
        let state = incremental_svd_step(SvdState::empty(3), array![1.0, 0.0, 0.0].view(), 2).unwrap();
        assert_eq!(state.rank(), 1);
        let next = incremental_svd_step(state, array![0.0, 0.0, 5.0].view(), 2).unwrap();
        assert_eq!(next.rank(), 2);
        assert!((next.singvals[0] - 5.0).abs() < 1e-12);
        assert!((next.singvals[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn truncation_caps_rank() {
        let state = two_dim_state();
        let next = incremental_svd_step(state, array![0.0, 0.0, 0.5].view(), 2).unwrap();
        assert_eq!(next.rank(), 2);
        assert_eq!(next.count, 3);
        // The weakest direction is discarded.
        assert!((next.singvals[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(incremental_svd_step(SvdState::empty(3), array![1.0].view(), 1).is_err());
    }
}
