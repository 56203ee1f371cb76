//! Independent oracles for the integration and acceptance tests. Nothing here
//! calls into the crate's numerical routines: dense linear algebra goes
//! through nalgebra and projections are solved by bisection or enumeration.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut impl Rng, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || StandardNormal.sample(rng))
}

pub fn gaussian_vec(rng: &mut impl Rng, n: usize) -> Array1<f64> {
    Array1::from_shape_simple_fn(n, || StandardNormal.sample(rng))
}

pub fn to_na(a: ArrayView2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

pub fn from_na(m: &DMatrix<f64>) -> Array2<f64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

/// Eigenvalues (descending) and matching eigenvector columns.
pub fn dense_eig(a: ArrayView2<f64>) -> (Array1<f64>, Array2<f64>) {
    let eig = SymmetricEigen::new(to_na(a));
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let vals = Array1::from_iter(order.iter().map(|&i| eig.eigenvalues[i]));
    let vecs = Array2::from_shape_fn((a.nrows(), order.len()), |(r, c)| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

/// Singular values of `a`, descending.
pub fn singular_values(a: ArrayView2<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = to_na(a).singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Orthogonal projector onto the column span of `v`, from a full SVD.
pub fn span_projector(v: ArrayView2<f64>) -> Array2<f64> {
    let svd = to_na(v).svd(true, false);
    let u = svd.u.unwrap();
    let rank = svd.singular_values.iter().filter(|&&s| s > 1e-10).count();
    let u = u.columns(0, rank).into_owned();
    from_na(&(&u * u.transpose()))
}

/// Projector onto the top-`k` eigenvectors of a symmetric matrix.
pub fn top_k_projector(a: ArrayView2<f64>, k: usize) -> Array2<f64> {
    let (_, vecs) = dense_eig(a);
    let u = vecs.slice(ndarray::s![.., ..k]).to_owned();
    u.dot(&u.t())
}

pub fn frob(a: ArrayView2<f64>) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dist(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Largest principal angle between two `k`-dimensional subspaces, from the
/// spectral norm of the projector difference.
pub fn principal_angle(a: ArrayView2<f64>, b: ArrayView2<f64>) -> f64 {
    let pa = span_projector(a);
    let pb = span_projector(b);
    let diff = to_na((&pa - &pb).view());
    let s = diff.singular_values().max();
    s.min(1.0).asin()
}

fn clip(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

fn clipped_sum(values: &[f64], s: f64) -> f64 {
    values.iter().map(|v| clip(v + s)).sum()
}

/// Shift-and-clip projection onto `{σ ∈ [0,1]ⁿ : Σσ = k}` by bisection on
/// the shift over `[−max σ' − 1, k − min σ']`.
pub fn fantope_bisection(values: &[f64], k: f64) -> Vec<f64> {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let (mut lo, mut hi) = (-max - 1.0, k - min + 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if clipped_sum(values, mid) < k {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = 0.5 * (lo + hi);
    values.iter().map(|v| clip(v + s)).collect()
}

/// Same projection by enumerating the breakpoints `−σ'ᵢ` and `1 − σ'ᵢ`:
/// between consecutive breakpoints the clipped sum is affine in the shift.
pub fn fantope_breakpoints(values: &[f64], k: f64) -> Vec<f64> {
    let mut bps: Vec<f64> = values.iter().flat_map(|v| [-v, 1.0 - v]).collect();
    bps.sort_by(f64::total_cmp);
    bps.dedup();
    let mut best: Option<(f64, f64)> = None;
    for w in bps.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (clipped_sum(values, a), clipped_sum(values, b));
        if fa <= k && k <= fb {
            let s = if fb > fa { a + (k - fa) * (b - a) / (fb - fa) } else { a };
            let err = (clipped_sum(values, s) - k).abs();
            if best.is_none_or(|(_, e)| err < e) {
                best = Some((s, err));
            }
        }
    }
    let s = best.expect("k lies within the range of the clipped sum").0;
    values.iter().map(|v| clip(v + s)).collect()
}

/// Minimum-distance point of `{σ ∈ [0,1]ⁿ : Σσ = k, nnz(σ) ≤ cap}` by
/// trying every support of size `k ..= cap`.
pub fn capped_exhaustive(values: &[f64], k: usize, cap: usize) -> (Vec<f64>, f64) {
    let n = values.len();
    assert!(n <= 16);
    let mut best: Option<(Vec<f64>, f64)> = None;
    for mask in 0u32..(1 << n) {
        let size = mask.count_ones() as usize;
        if size < k || size > cap {
            continue;
        }
        let idx: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let sub: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
        let proj = fantope_bisection(&sub, k as f64);
        let mut full = vec![0.0; n];
        for (&i, &p) in idx.iter().zip(&proj) {
            full[i] = p;
        }
        let d = dist(ArrayView1::from(&full), ArrayView1::from(values));
        if best.as_ref().is_none_or(|(_, bd)| d < *bd - 1e-14) {
            best = Some((full, d));
        }
    }
    best.expect("some support is feasible")
}

/// One dense MSG step: add `η·x·xᵀ`, eigendecompose, project the spectrum
/// (capped when `cap` is given), rebuild.
pub fn dense_msg_step(m: &Array2<f64>, x: ArrayView1<f64>, eta: f64, k: usize, cap: Option<usize>) -> Array2<f64> {
    let xc = x.to_owned().insert_axis(ndarray::Axis(1));
    let updated = m + &(xc.dot(&xc.t()) * eta);
    let (vals, vecs) = dense_eig(updated.view());
    let projected = match cap {
        Some(c) => capped_exhaustive(vals.as_slice().unwrap(), k, c).0,
        None => fantope_bisection(vals.as_slice().unwrap(), k as f64),
    };
    let scaled = &vecs * &Array1::from(projected).insert_axis(ndarray::Axis(0));
    scaled.dot(&vecs.t())
}

pub fn na_vec(v: ArrayView1<f64>) -> DVector<f64> {
    DVector::from_iterator(v.len(), v.iter().copied())
}
