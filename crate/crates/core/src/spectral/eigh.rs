use ndarray::{Array1, Array2};

use super::EigState;
use crate::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-10;
const MAX_SWEEPS: usize = 64;

/// Full eigendecomposition of a dense symmetric matrix by cyclic Jacobi
/// rotations.
///
/// Eigenvalues come back non-increasing; equal eigenvalues keep the order
/// Jacobi left them in. The returned state has rank `d` and, for an
/// indefinite input, negative eigenvalues. Intended for the desk-scale
/// dimensions of the batch baseline (`d` up to a few hundred).
pub fn full_symmetric_eig(a: &Array2<f64>) -> Result<EigState> {
    let (n, m) = a.dim();
    if n != m {
        return Err(Error::DimensionMismatch { expected: n, got: m });
    }
    let scale = a.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
    for i in 0..n {
        for j in (i + 1)..n {
            let gap = (a[[i, j]] - a[[j, i]]).abs();
            if gap.is_nan() || gap > SYMMETRY_TOL * scale {
                return Err(Error::NotSymmetric { row: i, col: j, gap });
            }
        }
    }

    let mut w = (a + &a.t()) * 0.5;
    let mut v = Array2::<f64>::eye(n);
    let frob2: f64 = w.iter().map(|x| x * x).sum();

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| w[[i, j]] * w[[i, j]])
            .sum();
        if off <= f64::EPSILON * f64::EPSILON * frob2 * 1e-2 || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = w[[p, q]];
                if apq == 0.0 {
                    continue;
                }
                let app = w[[p, p]];
                let aqq = w[[q, q]];
                // Off-diagonal entry below rounding of both diagonals.
                let g = 100.0 * apq.abs();
                if app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    w[[p, q]] = 0.0;
                    w[[q, p]] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let wkp = w[[k, p]];
                    let wkq = w[[k, q]];
                    w[[k, p]] = c * wkp - s * wkq;
                    w[[k, q]] = s * wkp + c * wkq;
                }
                for k in 0..n {
                    let wpk = w[[p, k]];
                    let wqk = w[[q, k]];
                    w[[p, k]] = c * wpk - s * wqk;
                    w[[q, k]] = s * wpk + c * wqk;
                }
                w[[p, q]] = 0.0;
                w[[q, p]] = 0.0;
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| w[[j, j]].total_cmp(&w[[i, i]]));
    let mut basis = Array2::zeros((n, n));
    let mut eigvals = Array1::zeros(n);
    for (dst, &src) in order.iter().enumerate() {
        eigvals[dst] = w[[src, src]];
        basis.column_mut(dst).assign(&v.column(src));
    }
    Ok(EigState { basis, eigvals })
}
