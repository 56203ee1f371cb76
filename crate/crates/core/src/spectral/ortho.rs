use ndarray::{s, Array1, Array2, ArrayView2, ArrayViewMut1};

use super::{full_symmetric_eig, norm};
use crate::{Error, Result};

/// Columns whose residual falls to this fraction of their original norm (or
/// of 1, whichever is larger) make the input rank deficient.
const DEFICIENCY_TOL: f64 = 1e-12;

/// Orthonormalizes the columns of `v` by modified Gram-Schmidt with one
/// reorthogonalization pass.
///
/// Column `j` of the result spans the same space as columns `0..=j` of the
/// input, and each column keeps the sign of its source (`R` has a positive
/// diagonal), so the routine is idempotent on orthonormal input.
pub fn orthonormalize(v: ArrayView2<f64>) -> Result<Array2<f64>> {
    let (d, k) = v.dim();
    if k > d {
        return Err(Error::RankDeficient {
            column: d,
            residual: 0.0,
        });
    }
    let mut q = Array2::zeros((d, k));
    for j in 0..k {
        let mut col = v.column(j).to_owned();
        let original = norm(col.view());
        for _ in 0..2 {
            subtract_projection(q.slice(s![.., ..j]), col.view_mut());
        }
        let residual = norm(col.view());
        if residual.is_nan() || residual <= DEFICIENCY_TOL * original.max(1.0) {
            return Err(Error::RankDeficient { column: j, residual });
        }
        col /= residual;
        q.column_mut(j).assign(&col);
    }
    Ok(q)
}

/// Appends `extra` orthonormal columns orthogonal to the (orthonormal)
/// columns of `u`. Candidates are canonical basis vectors taken in index
/// order, so the completion is deterministic.
pub fn complete_basis(u: ArrayView2<f64>, extra: usize) -> Result<Array2<f64>> {
    let (d, r) = u.dim();
    if r + extra > d {
        return Err(Error::invalid(format!(
            "cannot extend a rank-{r} basis by {extra} in dimension {d}"
        )));
    }
    let mut out = Array2::zeros((d, r + extra));
    out.slice_mut(s![.., ..r]).assign(&u);
    let mut filled = r;
    // Strict first pass keeps well-conditioned candidates; the loose pass
    // only runs when the strict one cannot find enough.
    for threshold in [0.5, 1e-6] {
        for i in 0..d {
            if filled == r + extra {
                break;
            }
            let mut cand = Array1::zeros(d);
            cand[i] = 1.0;
            for _ in 0..2 {
                subtract_projection(out.slice(s![.., ..filled]), cand.view_mut());
            }
            let res = norm(cand.view());
            if res > threshold {
                cand /= res;
                out.column_mut(filled).assign(&cand);
                filled += 1;
            }
        }
    }
    debug_assert_eq!(filled, r + extra);
    Ok(out)
}

/// Largest principal angle (radians) between `span(b)` and `span(a)`.
///
/// Both inputs must have orthonormal columns. Computed from the sine,
/// `‖(I − AAᵀ)B‖₂`, which stays accurate for tiny angles.
pub fn max_principal_angle(a: ArrayView2<f64>, b: ArrayView2<f64>) -> Result<f64> {
    super::check_dim(a.nrows(), b.nrows())?;
    if b.ncols() == 0 {
        return Ok(0.0);
    }
    let residual = &b - &a.dot(&a.t().dot(&b));
    let gram = residual.t().dot(&residual);
    let top = full_symmetric_eig(&gram)?.eigvals[0].max(0.0);
    Ok(top.sqrt().min(1.0).asin())
}

fn subtract_projection(q: ArrayView2<f64>, mut col: ArrayViewMut1<f64>) {
    for qi in q.columns() {
        let c = qi.dot(&col);
        col.scaled_add(-c, &qi);
    }
}
