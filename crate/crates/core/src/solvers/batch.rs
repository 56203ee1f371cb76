use ndarray::{Array2, ArrayView2};

use crate::spectral::{full_symmetric_eig, truncate_top_k, SubspaceState};
use crate::{Error, Result};

/// `(1/n)·XᵀX` for the `n × d` sample matrix `X`.
pub fn second_moment(data: ArrayView2<f64>) -> Array2<f64> {
    let n = data.nrows().max(1) as f64;
    data.t().dot(&data) / n
}

/// Sample-average (SAA) solution: the top-`k` eigenvectors of the empirical
/// second-moment matrix.
pub fn batch_pca(data: ArrayView2<f64>, k: usize) -> Result<SubspaceState> {
    let (n, d) = data.dim();
    if n == 0 {
        return Err(Error::EmptyStream);
    }
    if k == 0 || k > d {
        return Err(Error::invalid(format!("k = {k} must lie in 1..={d}")));
    }
    let eig = full_symmetric_eig(&second_moment(data))?;
    Ok(truncate_top_k(&eig, k)?.subspace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn diagonal_second_moment() {
        let x = array![[1.0, 0.0], [1.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let u = batch_pca(x.view(), 1).unwrap();
        assert!((u.basis[[0, 0]].abs() - 1.0).abs() < 1e-15);
        assert!(u.basis[[1, 0]].abs() < 1e-15);
    }

    #[test]
    fn single_row() {
        let x = array![[3.0, 0.0, 4.0]];
        let u = batch_pca(x.view(), 1).unwrap();
        let expected = [0.6, 0.0, 0.8];
        let sign = u.basis[[0, 0]].signum();
        for (got, want) in u.basis.column(0).iter().zip(expected) {
            assert!((sign * got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn k_above_dim_rejected() {
        let x = array![[1.0, 2.0]];
        assert!(batch_pca(x.view(), 3).is_err());
    }
}
